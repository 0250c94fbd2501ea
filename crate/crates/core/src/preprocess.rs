//! Tweet tokenization and feature-time preprocessing.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{LanguageTag, TokenAnnotation};

const BUNDLED_ENGLISH_STOPWORDS: &str = include_str!("../resources/stopwords_en.txt");
const BUNDLED_HINDI_STOPWORDS: &str = include_str!("../resources/stopwords_hi.txt");

/// Whole-token emoticons that the tokenizer keeps intact.
const EMOTICONS: &[&str] = &[
    ":)", ":-)", ":(", ":-(", ":D", ":-D", ";)", ";-)", ":P", ":-P", ":p", ":-p", ":'(", ":/", ":-/", ":|", ":-|",
    ":O", ":o", ":*", ":-*", "<3", "</3", "^_^", "-_-", "=)", "=(", "xD", "XD",
];

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("{0:?} is not a hashtag")]
    NotAHashtag(String),
    #[error("cannot read word list {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("word list {0} contains no entries")]
    EmptyList(String),
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

pub fn is_url(token: &str) -> bool {
    let lower = token.to_lowercase();
    lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.")
}

fn has_sigil(token: &str, sigil: char) -> bool {
    let mut chars = token.chars();
    chars.next() == Some(sigil) && chars.next().is_some_and(is_word_char)
}

/// `#` followed by at least one word character.
pub fn is_hashtag(token: &str) -> bool {
    has_sigil(token, '#')
}

/// `@` followed by at least one word character.
pub fn is_mention(token: &str) -> bool {
    has_sigil(token, '@')
}

pub fn is_emoticon(token: &str) -> bool {
    EMOTICONS.contains(&token)
}

fn tokenize_chunk(chunk: &str, out: &mut Vec<String>) {
    if is_url(chunk) || is_emoticon(chunk) {
        out.push(chunk.to_string());
        return;
    }
    let chars: Vec<char> = chunk.chars().collect();
    let n = chars.len();
    let mut i = 0;
    while i < n {
        let c = chars[i];
        let mut j = i + 1;
        if (c == '#' || c == '@') && j < n && is_word_char(chars[j]) {
            while j < n && is_word_char(chars[j]) {
                j += 1;
            }
        } else if is_word_char(c) {
            loop {
                while j < n && is_word_char(chars[j]) {
                    j += 1;
                }
                // keep contractions such as "don't" together
                if j + 1 < n && is_apostrophe(chars[j]) && is_word_char(chars[j + 1]) {
                    j += 1;
                    continue;
                }
                break;
            }
        } else {
            while j < n && chars[j] == c {
                j += 1;
            }
        }
        out.push(chars[i..j].iter().collect());
        i = j;
    }
}

/// Splits a tweet into tokens.
///
/// Whitespace delimits chunks. Within a chunk, hashtags, mentions, URLs and
/// emoticons stay whole, punctuation is split from words, and a run of the
/// same punctuation character (`!!!`, `...`) is a single token.
pub fn tokenize(raw_text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in raw_text.split_whitespace() {
        tokenize_chunk(chunk, &mut out);
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum CharClass {
    Upper,
    Lower,
    Digit,
    Other,
}

fn class_of(c: char) -> CharClass {
    if c.is_numeric() {
        CharClass::Digit
    } else if c.is_uppercase() {
        CharClass::Upper
    } else if c.is_lowercase() {
        CharClass::Lower
    } else {
        CharClass::Other
    }
}

fn split_camel(segment: &[char], out: &mut Vec<String>) {
    let mut start = 0;
    for i in 1..segment.len() {
        let prev = class_of(segment[i - 1]);
        let cur = class_of(segment[i]);
        let next = segment.get(i + 1).map(|&c| class_of(c));
        let boundary = (prev == CharClass::Lower && cur == CharClass::Upper)
            || (prev == CharClass::Upper && cur == CharClass::Upper && next == Some(CharClass::Lower))
            || ((prev == CharClass::Digit) != (cur == CharClass::Digit));
        if boundary {
            out.push(segment[start..i].iter().collect());
            start = i;
        }
    }
    if start < segment.len() {
        out.push(segment[start..].iter().collect());
    }
}

/// Splits a camel-case hashtag into its words.
///
/// Boundaries fall at lower→upper transitions, before the last capital of an
/// acronym run that is followed by a lowercase letter, and between digits and
/// letters. Non-alphanumeric characters (e.g. `_`) separate words and are
/// dropped.
pub fn decompose_hashtag(token: &str) -> Result<Vec<String>, PreprocessError> {
    let body = token
        .strip_prefix('#')
        .ok_or_else(|| PreprocessError::NotAHashtag(token.to_string()))?;
    let mut words = Vec::new();
    let chars: Vec<char> = body.chars().collect();
    for segment in chars.split(|c| !c.is_alphanumeric()) {
        if !segment.is_empty() {
            split_camel(segment, &mut words);
        }
    }
    Ok(words)
}

/// Case-insensitive stopword inventory.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopwordList {
    words: BTreeSet<String>,
    sources: Vec<PathBuf>,
}

fn parse_word_list(content: &str) -> impl Iterator<Item = String> + '_ {
    content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
}

pub(crate) fn read_word_list(path: &Path) -> Result<Vec<String>, PreprocessError> {
    let content = fs::read_to_string(path).map_err(|source| PreprocessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let words: Vec<String> = parse_word_list(&content).collect();
    if words.is_empty() {
        return Err(PreprocessError::EmptyList(path.display().to_string()));
    }
    Ok(words)
}

impl StopwordList {
    /// No stopword removal.
    pub fn none() -> Self {
        Self::default()
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        StopwordList {
            words: words.into_iter().map(|w| w.as_ref().to_lowercase()).collect(),
            sources: Vec::new(),
        }
    }

    /// The English and romanized-Hindi lists shipped with the crate.
    pub fn bundled() -> Self {
        StopwordList {
            words: parse_word_list(BUNDLED_ENGLISH_STOPWORDS)
                .chain(parse_word_list(BUNDLED_HINDI_STOPWORDS))
                .collect(),
            sources: vec![
                PathBuf::from("<bundled>/stopwords_en.txt"),
                PathBuf::from("<bundled>/stopwords_hi.txt"),
            ],
        }
    }

    /// Loads and merges one or more stopword files. Each file must be non-empty.
    pub fn load<P: AsRef<Path>>(paths: &[P]) -> Result<Self, PreprocessError> {
        let mut list = StopwordList::none();
        for p in paths {
            list.words.extend(read_word_list(p.as_ref())?);
            list.sources.push(p.as_ref().to_path_buf());
        }
        Ok(list)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(&word.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn sources(&self) -> &[PathBuf] {
        &self.sources
    }

    /// SHA-256 over the sorted, newline-joined entries.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for w in &self.words {
            hasher.update(w.as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }
}

/// Drops URLs, mentions and stopwords, expands hashtags into their words and
/// lowercases the survivors. Each output item carries the payload of the
/// source token it came from.
fn preprocess_with<T: Clone>(
    tokens: impl IntoIterator<Item = (String, T)>,
    stopwords: &StopwordList,
) -> Vec<(String, T)> {
    let mut out = Vec::new();
    let mut keep = |word: &str, payload: &T| {
        if !stopwords.contains(word) {
            out.push((word.to_lowercase(), payload.clone()));
        }
    };
    for (token, payload) in tokens {
        if is_url(&token) || is_mention(&token) {
            continue;
        }
        if is_hashtag(&token) {
            for word in decompose_hashtag(&token).expect("checked hashtag") {
                keep(&word, &payload);
            }
        } else {
            keep(&token, &payload);
        }
    }
    out
}

/// Feature-time preprocessing of a tokenized tweet.
pub fn preprocess_for_features<S: AsRef<str>>(tokens: &[S], stopwords: &StopwordList) -> Vec<String> {
    preprocess_with(tokens.iter().map(|t| (t.as_ref().to_string(), ())), stopwords)
        .into_iter()
        .map(|(w, ())| w)
        .collect()
}

/// Like [`preprocess_for_features`], keeping each word's language tag.
/// Words split out of a hashtag inherit the hashtag's tag.
pub fn preprocess_annotated(tokens: &[TokenAnnotation], stopwords: &StopwordList) -> Vec<(String, LanguageTag)> {
    preprocess_with(tokens.iter().map(|t| (t.surface().to_string(), t.tag)), stopwords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s)
    }

    #[test]
    fn table_one_tokens() {
        assert_eq!(
            toks("#Notebandi ka niyam : khata nahi hai"),
            ["#Notebandi", "ka", "niyam", ":", "khata", "nahi", "hai"]
        );
        assert_eq!(
            toks("hai to khulwao. Aam aadmi: khulwa to lun. Par bhai bank main ghusub Kasey?"),
            [
                "hai", "to", "khulwao", ".", "Aam", "aadmi", ":", "khulwa", "to", "lun", ".", "Par", "bhai", "bank",
                "main", "ghusub", "Kasey", "?"
            ]
        );
    }

    #[test]
    fn punctuation_runs() {
        assert_eq!(toks("wow!!! ...ok"), ["wow", "!!!", "...", "ok"]);
        assert_eq!(toks(",,, !?"), [",,,", "!", "?"]);
        assert!(toks("").is_empty());
        assert!(toks("   \n\t ").is_empty());
    }

    #[test]
    fn special_tokens_stay_whole() {
        assert_eq!(
            toks("@PMOIndia (#IAmWithModi) https://t.co/x.y? :) 500/1000 don't"),
            [
                "@PMOIndia",
                "(",
                "#IAmWithModi",
                ")",
                "https://t.co/x.y?",
                ":)",
                "500",
                "/",
                "1000",
                "don't"
            ]
        );
        assert_eq!(toks("#Modi!!"), ["#Modi", "!!"]);
        assert_eq!(toks("## #"), ["##", "#"]);
    }

    #[test]
    fn hashtag_decomposition() {
        assert_eq!(decompose_hashtag("#IAmWithModi").unwrap(), ["I", "Am", "With", "Modi"]);
        assert_eq!(decompose_hashtag("#notebandi").unwrap(), ["notebandi"]);
        assert_eq!(
            decompose_hashtag("#NoteNahiPMBadlo").unwrap(),
            ["Note", "Nahi", "PM", "Badlo"]
        );
        assert_eq!(decompose_hashtag("#NOTEBANDI").unwrap(), ["NOTEBANDI"]);
        assert_eq!(decompose_hashtag("#Notebandi2016").unwrap(), ["Notebandi", "2016"]);
        assert_eq!(decompose_hashtag("#bye_bye").unwrap(), ["bye", "bye"]);
        assert!(matches!(
            decompose_hashtag("Modi"),
            Err(PreprocessError::NotAHashtag(_))
        ));
    }

    #[test]
    fn feature_preprocessing() {
        let none = StopwordList::none();
        assert_eq!(
            preprocess_for_features(&["@PMOIndia", "Chalo", "Modi", "ji"], &none),
            ["chalo", "modi", "ji"]
        );
        let sw = StopwordList::from_words(["i", "am", "with"]);
        assert_eq!(preprocess_for_features(&["#IAmWithModi"], &sw), ["modi"]);
        assert!(preprocess_for_features::<&str>(&[], &sw).is_empty());
        assert_eq!(
            preprocess_for_features(
                &["www.rbi.org", "http://x", "Ka", "bank"],
                &StopwordList::from_words(["KA"])
            ),
            ["bank"]
        );
    }

    #[test]
    fn annotated_preprocessing_inherits_hashtag_tag() {
        let tokens = vec![
            TokenAnnotation::new("#ByeByeBlackMoney", LanguageTag::Rest).unwrap(),
            TokenAnnotation::new("nahi", LanguageTag::Hi).unwrap(),
        ];
        let out = preprocess_annotated(&tokens, &StopwordList::none());
        assert_eq!(
            out,
            vec![
                ("bye".to_string(), LanguageTag::Rest),
                ("bye".to_string(), LanguageTag::Rest),
                ("black".to_string(), LanguageTag::Rest),
                ("money".to_string(), LanguageTag::Rest),
                ("nahi".to_string(), LanguageTag::Hi),
            ]
        );
    }

    #[test]
    fn bundled_stopwords_load() {
        let sw = StopwordList::bundled();
        assert!(sw.contains("The"));
        assert!(sw.contains("ka"));
        assert!(sw.contains("hai"));
        assert!(!sw.contains("notebandi"));
        assert_eq!(sw.hash(), StopwordList::bundled().hash());
        assert_ne!(sw.hash(), StopwordList::none().hash());
    }

    #[test]
    fn stopword_files_skip_comments() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sw.txt");
        fs::write(&path, "# comment\nThe\n\n  ka \n").unwrap();
        let sw = StopwordList::load(&[&path]).unwrap();
        assert_eq!(sw.len(), 2);
        assert!(sw.contains("the") && sw.contains("KA"));
        let empty = dir.path().join("empty.txt");
        fs::write(&empty, "# nothing\n").unwrap();
        assert!(matches!(
            StopwordList::load(&[&empty]),
            Err(PreprocessError::EmptyList(_))
        ));
    }

    proptest! {
        #[test]
        fn tokenize_is_a_fixed_point(s in "[a-zA-Z0-9#@:.!?,' /_-]{0,40}") {
            let first = tokenize(&s);
            prop_assert!(first.iter().all(|t| !t.is_empty() && !t.chars().any(char::is_whitespace)));
            let again = tokenize(&first.join(" "));
            prop_assert_eq!(again, first);
        }

        #[test]
        fn decomposition_concatenates_to_body(body in "[A-Za-z0-9]{1,20}") {
            let words = decompose_hashtag(&format!("#{body}")).unwrap();
            prop_assert_eq!(words.concat().to_lowercase(), body.to_lowercase());
        }

        #[test]
        fn preprocessing_preserves_order(words in proptest::collection::vec("[a-z]{1,6}", 0..12)) {
            let sw = StopwordList::from_words(["ka", "hai", "the"]);
            let out = preprocess_for_features(&words, &sw);
            let expected: Vec<String> = words.iter().filter(|w| !sw.contains(w)).cloned().collect();
            prop_assert_eq!(out, expected);
        }
    }
}
