//! Corpus data model and the three-file on-disk format.
//!
//! A corpus is stored as three UTF-8 files that share tweet ids:
//!
//! * the text file: an id line, one or more text lines, then a blank line;
//! * the language file: an id line, then one `token<TAB>tag` line per token;
//! * the stance file: an id line, then a single `FAVOR`/`AGAINST`/`NONE` line.
//!
//! Records are separated by one or more fully blank lines and the final
//! separator is optional.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::preprocess::tokenize;

pub const TEXT_FILE: &str = "text.txt";
pub const LANG_FILE: &str = "lang.txt";
pub const STANCE_FILE: &str = "stance.txt";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("duplicate tweet id {id} in {source_name}")]
    DuplicateId { id: String, source_name: String },
    #[error("tweet id {id} in {source_name} is not present in the text file")]
    DanglingId { id: String, source_name: String },
    #[error("tweet id {id} has no record in {source_name}")]
    MissingAnnotation { id: String, source_name: String },
    #[error("tweet {id}: annotated tokens do not match the tweet text")]
    TokenMismatch { id: String },
    #[error("tweet {id} is not fully annotated")]
    Unannotated { id: String },
    #[error("tweet {id}: text contains a blank line and cannot be serialized")]
    Unrepresentable { id: String },
    #[error("invalid token {0:?}: tokens are non-empty and contain no whitespace")]
    InvalidToken(String),
    #[error("unknown stance label {0:?}")]
    UnknownStance(String),
    #[error("unknown language tag {0:?}")]
    UnknownTag(String),
}

pub type Result<T, E = CorpusError> = std::result::Result<T, E>;

/// Stance of a tweet towards the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StanceLabel {
    Favor,
    Against,
    None,
}

impl StanceLabel {
    /// All labels in tie-breaking order.
    pub const ALL: [StanceLabel; 3] = [StanceLabel::Favor, StanceLabel::Against, StanceLabel::None];

    pub fn index(self) -> usize {
        match self {
            StanceLabel::Favor => 0,
            StanceLabel::Against => 1,
            StanceLabel::None => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StanceLabel::Favor => "FAVOR",
            StanceLabel::Against => "AGAINST",
            StanceLabel::None => "NONE",
        }
    }
}

impl fmt::Display for StanceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StanceLabel {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "FAVOR" => Ok(StanceLabel::Favor),
            "AGAINST" => Ok(StanceLabel::Against),
            "NONE" => Ok(StanceLabel::None),
            other => Err(CorpusError::UnknownStance(other.to_string())),
        }
    }
}

/// Token-level language tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LanguageTag {
    En,
    Hi,
    Rest,
}

impl LanguageTag {
    pub const ALL: [LanguageTag; 3] = [LanguageTag::En, LanguageTag::Hi, LanguageTag::Rest];

    pub fn as_str(self) -> &'static str {
        match self {
            LanguageTag::En => "en",
            LanguageTag::Hi => "hi",
            LanguageTag::Rest => "rest",
        }
    }
}

impl fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LanguageTag {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "en" => Ok(LanguageTag::En),
            "hi" => Ok(LanguageTag::Hi),
            "rest" => Ok(LanguageTag::Rest),
            other => Err(CorpusError::UnknownTag(other.to_string())),
        }
    }
}

/// A token with its language tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TokenAnnotation {
    surface: String,
    pub tag: LanguageTag,
}

impl TokenAnnotation {
    pub fn new(surface: impl Into<String>, tag: LanguageTag) -> Result<Self> {
        let surface = surface.into();
        if surface.is_empty() || surface.chars().any(char::is_whitespace) {
            return Err(CorpusError::InvalidToken(surface));
        }
        Ok(TokenAnnotation { surface, tag })
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tweet {
    pub id: String,
    pub raw_text: String,
    pub tokens: Vec<TokenAnnotation>,
    pub stance: Option<StanceLabel>,
}

impl Tweet {
    pub fn new(id: impl Into<String>, raw_text: impl Into<String>) -> Self {
        Tweet {
            id: id.into(),
            raw_text: raw_text.into(),
            tokens: Vec::new(),
            stance: None,
        }
    }

    pub fn is_annotated(&self) -> bool {
        self.stance.is_some() && !self.tokens.is_empty()
    }
}

/// An ordered collection of tweets with unique ids.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    tweets: Vec<Tweet>,
    provenance: Vec<PathBuf>,
}

impl Corpus {
    pub fn new(tweets: Vec<Tweet>) -> Result<Self> {
        Self::with_provenance(tweets, Vec::new())
    }

    pub fn with_provenance(tweets: Vec<Tweet>, provenance: Vec<PathBuf>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(tweets.len());
        for t in &tweets {
            if !seen.insert(t.id.as_str()) {
                return Err(CorpusError::DuplicateId {
                    id: t.id.clone(),
                    source_name: "corpus".into(),
                });
            }
        }
        Ok(Corpus { tweets, provenance })
    }

    pub fn tweets(&self) -> &[Tweet] {
        &self.tweets
    }

    pub fn into_tweets(self) -> Vec<Tweet> {
        self.tweets
    }

    pub fn provenance(&self) -> &[PathBuf] {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    /// Every tweet carries both a stance and a token annotation.
    pub fn is_fully_annotated(&self) -> bool {
        self.tweets.iter().all(Tweet::is_annotated)
    }

    pub fn labels(&self) -> Option<Vec<StanceLabel>> {
        self.tweets.iter().map(|t| t.stance).collect()
    }
}

/// How strictly annotated tokens are checked against the tweet text on load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TokenCheck {
    /// No check; the published corpus was tokenized by hand.
    #[default]
    Off,
    /// Concatenated surfaces equal the text with whitespace removed.
    Characters,
    /// Surfaces equal the output of [`tokenize`] on the text.
    Exact,
}

struct RawRecord<'a> {
    id: String,
    id_line: usize,
    body: Vec<(usize, &'a str)>,
}

fn parse_error(source_name: &str, line: usize, message: impl Into<String>) -> CorpusError {
    CorpusError::Parse {
        source_name: source_name.to_string(),
        line,
        message: message.into(),
    }
}

fn is_blank(line: &str) -> bool {
    line.trim().is_empty()
}

/// Splits a file into id-headed, blank-line separated records.
fn split_records<'a>(content: &'a str, source_name: &str) -> Result<Vec<RawRecord<'a>>> {
    let content = content.strip_prefix('\u{feff}').unwrap_or(content);
    let mut records: Vec<RawRecord<'a>> = Vec::new();
    let mut current: Option<RawRecord<'a>> = None;
    let mut last_line = 0;

    for (i, line) in content.lines().enumerate() {
        let lineno = i + 1;
        last_line = lineno;
        if is_blank(line) {
            if let Some(rec) = current.take() {
                if rec.body.is_empty() {
                    return Err(parse_error(
                        source_name,
                        lineno,
                        format!("record {} has no content after its id line", rec.id),
                    ));
                }
                records.push(rec);
            }
            continue;
        }
        match current.as_mut() {
            Some(rec) => rec.body.push((lineno, line)),
            None => {
                let id = line.trim();
                if id.chars().any(char::is_whitespace) {
                    return Err(parse_error(source_name, lineno, format!("malformed tweet id {id:?}")));
                }
                current = Some(RawRecord {
                    id: id.to_string(),
                    id_line: lineno,
                    body: Vec::new(),
                });
            }
        }
    }
    if let Some(rec) = current {
        if rec.body.is_empty() {
            return Err(parse_error(
                source_name,
                last_line.max(rec.id_line) + 1,
                format!("record {} has no content after its id line", rec.id),
            ));
        }
        records.push(rec);
    }
    Ok(records)
}

/// Parses text-file content into `(id, text)` records.
pub fn parse_text_str(content: &str, source_name: &str) -> Result<Vec<(String, String)>> {
    Ok(split_records(content, source_name)?
        .into_iter()
        .map(|rec| {
            let text = rec.body.iter().map(|(_, l)| *l).collect::<Vec<_>>().join("\n");
            (rec.id, text)
        })
        .collect())
}

fn parse_lang_line(line: &str, lineno: usize, source_name: &str) -> Result<TokenAnnotation> {
    let (token, tag) = if let Some(split) = line.split_once('\t') {
        split
    } else if let Some(pos) = line.trim_start().find("  ") {
        let trimmed = line.trim_start();
        (&trimmed[..pos], &trimmed[pos..])
    } else {
        return Err(parse_error(
            source_name,
            lineno,
            "expected `token<TAB>tag` (missing TAB separator)",
        ));
    };
    let token = token.trim();
    let tag: LanguageTag = tag
        .trim()
        .parse()
        .map_err(|e: CorpusError| parse_error(source_name, lineno, e.to_string()))?;
    TokenAnnotation::new(token, tag).map_err(|e| parse_error(source_name, lineno, e.to_string()))
}

/// Parses language-file content into `(id, tokens)` records.
pub fn parse_lang_str(content: &str, source_name: &str) -> Result<Vec<(String, Vec<TokenAnnotation>)>> {
    split_records(content, source_name)?
        .into_iter()
        .map(|rec| {
            let tokens = rec
                .body
                .iter()
                .map(|&(lineno, line)| parse_lang_line(line, lineno, source_name))
                .collect::<Result<Vec<_>>>()?;
            Ok((rec.id, tokens))
        })
        .collect()
}

/// Parses stance-file content into `(id, label)` records.
pub fn parse_stance_str(content: &str, source_name: &str) -> Result<Vec<(String, StanceLabel)>> {
    split_records(content, source_name)?
        .into_iter()
        .map(|rec| {
            if rec.body.len() > 1 {
                return Err(parse_error(
                    source_name,
                    rec.body[1].0,
                    format!("record {} has more than one stance line", rec.id),
                ));
            }
            let (lineno, line) = rec.body[0];
            let label = line
                .trim()
                .parse()
                .map_err(|e: CorpusError| parse_error(source_name, lineno, e.to_string()))?;
            Ok((rec.id, label))
        })
        .collect()
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn parse_text_file(path: &Path) -> Result<Vec<(String, String)>> {
    parse_text_str(&read_file(path)?, &path.display().to_string())
}

pub fn parse_lang_file(path: &Path) -> Result<Vec<(String, Vec<TokenAnnotation>)>> {
    parse_lang_str(&read_file(path)?, &path.display().to_string())
}

pub fn parse_stance_file(path: &Path) -> Result<Vec<(String, StanceLabel)>> {
    parse_stance_str(&read_file(path)?, &path.display().to_string())
}

fn index_by_id<T>(records: Vec<(String, T)>, known: &HashSet<&str>, source_name: &str) -> Result<HashMap<String, T>> {
    let mut map = HashMap::with_capacity(records.len());
    for (id, value) in records {
        if !known.contains(id.as_str()) {
            return Err(CorpusError::DanglingId {
                id,
                source_name: source_name.to_string(),
            });
        }
        if map.contains_key(&id) {
            return Err(CorpusError::DuplicateId {
                id,
                source_name: source_name.to_string(),
            });
        }
        map.insert(id, value);
    }
    Ok(map)
}

fn check_tokens(tweet: &Tweet, check: TokenCheck) -> Result<()> {
    let surfaces = tweet.tokens.iter().map(TokenAnnotation::surface);
    let ok = match check {
        TokenCheck::Off => true,
        TokenCheck::Characters => {
            let joined: String = surfaces.collect();
            let squeezed: String = tweet.raw_text.chars().filter(|c| !c.is_whitespace()).collect();
            joined == squeezed
        }
        TokenCheck::Exact => surfaces.eq(tokenize(&tweet.raw_text).iter().map(String::as_str)),
    };
    if ok {
        Ok(())
    } else {
        Err(CorpusError::TokenMismatch { id: tweet.id.clone() })
    }
}

/// Joins parsed records into a corpus.
///
/// `lang` and `stance` carry their source names for diagnostics. Every id
/// in an optional file must appear in the text file, and every text record
/// must have an entry in each supplied optional file.
pub fn join_records(
    text: Vec<(String, String)>,
    text_source: &str,
    lang: Option<(Vec<(String, Vec<TokenAnnotation>)>, &str)>,
    stance: Option<(Vec<(String, StanceLabel)>, &str)>,
    check: TokenCheck,
) -> Result<Vec<Tweet>> {
    let mut known = HashSet::with_capacity(text.len());
    for (id, _) in &text {
        if !known.insert(id.as_str()) {
            return Err(CorpusError::DuplicateId {
                id: id.clone(),
                source_name: text_source.to_string(),
            });
        }
    }
    let lang = lang
        .map(|(records, name)| index_by_id(records, &known, name).map(|m| (m, name)))
        .transpose()?;
    let stance = stance
        .map(|(records, name)| index_by_id(records, &known, name).map(|m| (m, name)))
        .transpose()?;

    let mut lang = lang;
    let mut stance = stance;
    let mut tweets = Vec::with_capacity(text.len());
    for (id, raw_text) in text {
        let mut tweet = Tweet::new(id, raw_text);
        if let Some((map, name)) = lang.as_mut() {
            tweet.tokens = map.remove(&tweet.id).ok_or_else(|| CorpusError::MissingAnnotation {
                id: tweet.id.clone(),
                source_name: name.to_string(),
            })?;
            check_tokens(&tweet, check)?;
        }
        if let Some((map, name)) = stance.as_mut() {
            tweet.stance = Some(map.remove(&tweet.id).ok_or_else(|| CorpusError::MissingAnnotation {
                id: tweet.id.clone(),
                source_name: name.to_string(),
            })?);
        }
        tweets.push(tweet);
    }
    Ok(tweets)
}

/// Loads a corpus from a text file and optional language and stance files.
pub fn load_corpus(text_path: &Path, lang_path: Option<&Path>, stance_path: Option<&Path>) -> Result<Corpus> {
    load_corpus_checked(text_path, lang_path, stance_path, TokenCheck::Off)
}

pub fn load_corpus_checked(
    text_path: &Path,
    lang_path: Option<&Path>,
    stance_path: Option<&Path>,
    check: TokenCheck,
) -> Result<Corpus> {
    let text_name = text_path.display().to_string();
    let lang_name = lang_path.map(|p| p.display().to_string());
    let stance_name = stance_path.map(|p| p.display().to_string());

    let text = parse_text_file(text_path)?;
    let lang = lang_path.map(parse_lang_file).transpose()?;
    let stance = stance_path.map(parse_stance_file).transpose()?;

    let tweets = join_records(
        text,
        &text_name,
        lang.map(|r| (r, lang_name.as_deref().unwrap_or_default())),
        stance.map(|r| (r, stance_name.as_deref().unwrap_or_default())),
        check,
    )?;

    let mut provenance = vec![text_path.to_path_buf()];
    provenance.extend(lang_path.map(Path::to_path_buf));
    provenance.extend(stance_path.map(Path::to_path_buf));
    Corpus::with_provenance(tweets, provenance)
}

/// Loads `text.txt`, `lang.txt` and `stance.txt` from a directory; the
/// latter two are optional.
pub fn load_corpus_dir(dir: &Path) -> Result<Corpus> {
    let lang = dir.join(LANG_FILE);
    let stance = dir.join(STANCE_FILE);
    load_corpus(
        &dir.join(TEXT_FILE),
        lang.exists().then_some(lang.as_path()),
        stance.exists().then_some(stance.as_path()),
    )
}

pub fn format_text_records(corpus: &Corpus) -> Result<String> {
    let mut out = String::new();
    for t in corpus.tweets() {
        if t.raw_text.lines().any(is_blank) || t.raw_text.ends_with('\n') {
            return Err(CorpusError::Unrepresentable { id: t.id.clone() });
        }
        out.push_str(&t.id);
        out.push('\n');
        out.push_str(&t.raw_text);
        out.push_str("\n\n");
    }
    Ok(out)
}

pub fn format_lang_records(corpus: &Corpus) -> Result<String> {
    let mut out = String::new();
    for t in corpus.tweets() {
        if t.tokens.is_empty() {
            return Err(CorpusError::Unannotated { id: t.id.clone() });
        }
        out.push_str(&t.id);
        out.push('\n');
        for tok in &t.tokens {
            out.push_str(tok.surface());
            out.push('\t');
            out.push_str(tok.tag.as_str());
            out.push('\n');
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn format_stance_records(corpus: &Corpus) -> Result<String> {
    let mut out = String::new();
    for t in corpus.tweets() {
        let label = t.stance.ok_or_else(|| CorpusError::Unannotated { id: t.id.clone() })?;
        out.push_str(&t.id);
        out.push('\n');
        out.push_str(label.as_str());
        out.push_str("\n\n");
    }
    Ok(out)
}

/// Paths of a written corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusFiles {
    pub text: PathBuf,
    pub lang: PathBuf,
    pub stance: PathBuf,
}

/// Writes a fully annotated corpus as three files in `dir`.
pub fn write_corpus(corpus: &Corpus, dir: &Path) -> Result<CorpusFiles> {
    if let Some(t) = corpus.tweets().iter().find(|t| !t.is_annotated()) {
        return Err(CorpusError::Unannotated { id: t.id.clone() });
    }
    let text = format_text_records(corpus)?;
    let lang = format_lang_records(corpus)?;
    let stance = format_stance_records(corpus)?;

    let io_err = |path: &Path| {
        let path = path.display().to_string();
        move |source| CorpusError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let files = CorpusFiles {
        text: dir.join(TEXT_FILE),
        lang: dir.join(LANG_FILE),
        stance: dir.join(STANCE_FILE),
    };
    fs::write(&files.text, text).map_err(io_err(&files.text))?;
    fs::write(&files.lang, lang).map_err(io_err(&files.lang))?;
    fs::write(&files.stance, stance).map_err(io_err(&files.stance))?;
    Ok(files)
}

/// Corpus- and tweet-level statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    pub total: usize,
    pub favor: usize,
    pub against: usize,
    pub none: usize,
    pub mean_tokens: f64,
    pub mean_en: f64,
    pub mean_hi: f64,
    pub mean_rest: f64,
}

impl StatsReport {
    /// Machine-readable `key=value` lines. Averages are rounded to one decimal.
    pub fn key_values(&self) -> String {
        format!(
            "total={}\nfavor={}\nagainst={}\nnone={}\navg_tokens={:.1}\navg_en={:.1}\navg_hi={:.1}\navg_rest={:.1}\n",
            self.total,
            self.favor,
            self.against,
            self.none,
            self.mean_tokens,
            self.mean_en,
            self.mean_hi,
            self.mean_rest
        )
    }
}

impl fmt::Display for StatsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<20}{:>10}", "Category", "Tweets")?;
        writeln!(f, "{:<20}{:>10}", "Total tweets", self.total)?;
        writeln!(f, "{:<20}{:>10}", "Tweets in favor", self.favor)?;
        writeln!(f, "{:<20}{:>10}", "Tweets against", self.against)?;
        writeln!(f, "{:<20}{:>10}", "Neutral tweets", self.none)?;
        writeln!(f)?;
        writeln!(f, "{:<20}{:>10}", "Category", "Tokens")?;
        writeln!(f, "{:<20}{:>10.1}", "Avg. tokens", self.mean_tokens)?;
        writeln!(f, "{:<20}{:>10.1}", "Avg. en tokens", self.mean_en)?;
        writeln!(f, "{:<20}{:>10.1}", "Avg. hi tokens", self.mean_hi)?;
        write!(f, "{:<20}{:>10.1}", "Avg. rest tokens", self.mean_rest)
    }
}

/// Computes stance counts and per-tweet token averages.
///
/// Fails if any tweet lacks a stance or token annotation. An empty corpus
/// reports zeros.
pub fn corpus_stats(corpus: &Corpus) -> Result<StatsReport> {
    let mut by_stance = [0usize; 3];
    let mut by_tag = [0usize; 3];
    let mut tokens = 0usize;
    for t in corpus.tweets() {
        let stance = match t.stance {
            Some(s) if !t.tokens.is_empty() => s,
            _ => return Err(CorpusError::Unannotated { id: t.id.clone() }),
        };
        by_stance[stance.index()] += 1;
        tokens += t.tokens.len();
        for tok in &t.tokens {
            let slot = match tok.tag {
                LanguageTag::En => 0,
                LanguageTag::Hi => 1,
                LanguageTag::Rest => 2,
            };
            by_tag[slot] += 1;
        }
    }
    let total = corpus.len();
    let mean = |x: usize| if total == 0 { 0.0 } else { x as f64 / total as f64 };
    Ok(StatsReport {
        total,
        favor: by_stance[0],
        against: by_stance[1],
        none: by_stance[2],
        mean_tokens: mean(tokens),
        mean_en: mean(by_tag[0]),
        mean_hi: mean(by_tag[1]),
        mean_rest: mean(by_tag[2]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_of(err: CorpusError) -> usize {
        match err {
            CorpusError::Parse { line, .. } => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn text_records_in_file_order() {
        let recs = parse_text_str("123\nhello notebandi\n\n456\nok\n", "t").unwrap();
        assert_eq!(
            recs,
            vec![
                ("123".to_string(), "hello notebandi".to_string()),
                ("456".to_string(), "ok".to_string())
            ]
        );
    }

    #[test]
    fn multi_line_text_and_missing_final_blank() {
        let recs = parse_text_str("1\nline one\nline two\n\n\n2\nlast", "t").unwrap();
        assert_eq!(recs[0].1, "line one\nline two");
        assert_eq!(recs[1], ("2".to_string(), "last".to_string()));
    }

    #[test]
    fn empty_inputs_parse_to_nothing() {
        assert!(parse_text_str("", "t").unwrap().is_empty());
        assert!(parse_lang_str("", "l").unwrap().is_empty());
        assert!(parse_stance_str("", "s").unwrap().is_empty());
    }

    #[test]
    fn id_without_text_reports_line() {
        assert_eq!(line_of(parse_text_str("123\n\n", "t").unwrap_err()), 2);
        assert_eq!(line_of(parse_text_str("1\na\n\n123\n", "t").unwrap_err()), 5);
    }

    #[test]
    fn malformed_id_is_rejected() {
        assert_eq!(line_of(parse_text_str("12 3\ntext\n", "t").unwrap_err()), 1);
    }

    #[test]
    fn lang_record_from_table_one() {
        let recs = parse_lang_str("900\n#Notebandi\thi\nka\thi\n:\trest\n\n", "l").unwrap();
        assert_eq!(recs.len(), 1);
        let (id, toks) = &recs[0];
        assert_eq!(id, "900");
        let got: Vec<(&str, LanguageTag)> = toks.iter().map(|t| (t.surface(), t.tag)).collect();
        assert_eq!(
            got,
            vec![
                ("#Notebandi", LanguageTag::Hi),
                ("ka", LanguageTag::Hi),
                (":", LanguageTag::Rest)
            ]
        );
    }

    #[test]
    fn lang_reader_accepts_multiple_spaces() {
        let recs = parse_lang_str("1\nbank    en\n", "l").unwrap();
        assert_eq!(recs[0].1[0].tag, LanguageTag::En);
        assert_eq!(recs[0].1[0].surface(), "bank");
    }

    #[test]
    fn lang_reader_errors() {
        assert_eq!(line_of(parse_lang_str("1\nbank\tenglish\n", "l").unwrap_err()), 2);
        assert_eq!(line_of(parse_lang_str("1\nka\thi\nbank en\n", "l").unwrap_err()), 3);
    }

    #[test]
    fn stance_records() {
        assert_eq!(
            parse_stance_str("77\nFAVOR\n\n", "s").unwrap(),
            vec![("77".to_string(), StanceLabel::Favor)]
        );
        assert_eq!(line_of(parse_stance_str("77\nMAYBE\n\n", "s").unwrap_err()), 2);
        assert_eq!(line_of(parse_stance_str("77\nFAVOR\nNONE\n", "s").unwrap_err()), 3);
        assert!("favor".parse::<StanceLabel>().is_err());
    }

    fn fixture() -> (
        Vec<(String, String)>,
        Vec<(String, Vec<TokenAnnotation>)>,
        Vec<(String, StanceLabel)>,
    ) {
        let text = parse_text_str("1\nnotebandi sahi hai\n\n2\nbank band !!!\n", "t").unwrap();
        let lang = parse_lang_str(
            "1\nnotebandi\thi\nsahi\thi\nhai\thi\n\n2\nbank\ten\nband\thi\n!!!\trest\n",
            "l",
        )
        .unwrap();
        let stance = parse_stance_str("1\nFAVOR\n\n2\nAGAINST\n", "s").unwrap();
        (text, lang, stance)
    }

    #[test]
    fn join_three_files() {
        let (text, lang, stance) = fixture();
        let tweets = join_records(text, "t", Some((lang, "l")), Some((stance, "s")), TokenCheck::Exact).unwrap();
        assert_eq!(tweets.len(), 2);
        assert!(tweets.iter().all(Tweet::is_annotated));
        assert_eq!(tweets[1].stance, Some(StanceLabel::Against));
    }

    #[test]
    fn text_only_join_leaves_annotations_absent() {
        let (text, _, _) = fixture();
        let tweets = join_records(text, "t", None, None, TokenCheck::Off).unwrap();
        assert!(tweets.iter().all(|t| t.stance.is_none() && t.tokens.is_empty()));
    }

    #[test]
    fn dangling_and_missing_ids() {
        let (text, _, mut stance) = fixture();
        stance.push(("99".into(), StanceLabel::None));
        let err = join_records(text.clone(), "t", None, Some((stance, "s")), TokenCheck::Off).unwrap_err();
        assert!(matches!(err, CorpusError::DanglingId { ref id, .. } if id == "99"));

        let short = vec![("1".to_string(), StanceLabel::Favor)];
        let err = join_records(text, "t", None, Some((short, "s")), TokenCheck::Off).unwrap_err();
        assert!(matches!(err, CorpusError::MissingAnnotation { ref id, .. } if id == "2"));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let (text, _, _) = fixture();
        let stance = parse_stance_str("1\nFAVOR\n\n1\nNONE\n", "s").unwrap();
        let err = join_records(text, "t", None, Some((stance, "s")), TokenCheck::Off).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateId { .. }));
    }

    #[test]
    fn token_check_modes() {
        let (text, _, _) = fixture();
        let lang = parse_lang_str(
            "1\nnotebandi\thi\nsahihai\thi\n\n2\nbank\ten\nband\thi\n!!!\trest\n",
            "l",
        )
        .unwrap();
        assert!(join_records(
            text.clone(),
            "t",
            Some((lang.clone(), "l")),
            None,
            TokenCheck::Characters
        )
        .is_ok());
        assert!(matches!(
            join_records(text, "t", Some((lang, "l")), None, TokenCheck::Exact),
            Err(CorpusError::TokenMismatch { .. })
        ));
    }

    #[test]
    fn write_then_load_is_identity() {
        let (text, lang, stance) = fixture();
        let corpus =
            Corpus::new(join_records(text, "t", Some((lang, "l")), Some((stance, "s")), TokenCheck::Off).unwrap())
                .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = write_corpus(&corpus, dir.path()).unwrap();
        let back = load_corpus(&files.text, Some(&files.lang), Some(&files.stance)).unwrap();
        assert_eq!(back.tweets(), corpus.tweets());
        assert_eq!(
            fs::read_to_string(&files.text).unwrap(),
            format_text_records(&back).unwrap()
        );
    }

    #[test]
    fn write_empty_and_partial() {
        let dir = tempfile::tempdir().unwrap();
        let files = write_corpus(&Corpus::default(), dir.path()).unwrap();
        for p in [&files.text, &files.lang, &files.stance] {
            assert_eq!(fs::read_to_string(p).unwrap(), "");
        }
        let (text, lang, stance) = fixture();
        let mut tweets = join_records(text, "t", Some((lang, "l")), Some((stance, "s")), TokenCheck::Off).unwrap();
        tweets[1].stance = None;
        let err = write_corpus(&Corpus::new(tweets).unwrap(), dir.path()).unwrap_err();
        assert!(matches!(err, CorpusError::Unannotated { .. }));
    }

    #[test]
    fn stats_of_single_tweet() {
        let mut t = Tweet::new("1", "a b c d e");
        t.tokens = "a b c d e"
            .split(' ')
            .map(|s| TokenAnnotation::new(s, LanguageTag::Hi).unwrap())
            .collect();
        t.stance = Some(StanceLabel::None);
        let stats = corpus_stats(&Corpus::new(vec![t]).unwrap()).unwrap();
        assert_eq!((stats.total, stats.none, stats.favor), (1, 1, 0));
        assert_eq!(stats.mean_tokens, 5.0);
        assert_eq!(stats.mean_hi, 5.0);
        assert_eq!(stats.mean_en, 0.0);
        assert!(stats.key_values().contains("avg_tokens=5.0\n"));
    }

    #[test]
    fn stats_of_empty_corpus_are_zero() {
        let stats = corpus_stats(&Corpus::default()).unwrap();
        assert_eq!(stats.total, 0);
        assert_eq!(stats.mean_tokens, 0.0);
    }
}
