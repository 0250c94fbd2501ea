//! Character n-gram, word n-gram and stance-indicative-token features.
//!
//! All features are binary: a vector records which descriptors occur in a
//! tweet. Descriptors are mined from a preprocessed training split and kept
//! when they reach a frequency threshold.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::ops::RangeInclusive;
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{Corpus, LanguageTag, StanceLabel, Tweet};
use crate::preprocess::{preprocess_annotated, preprocess_for_features, tokenize, StopwordList};
use crate::Score;

pub const FEATURE_SPACE_HEADER: &str = "codemix-stance feature-space v1";

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("token {0:?} does not occur in the corpus")]
    UnknownToken(String),
    #[error("tweet {0} has no language tags")]
    MissingTags(String),
    #[error("tweet {0} has no stance label")]
    MissingStance(String),
    #[error("invalid threshold: {0}")]
    InvalidThreshold(String),
    #[error("malformed feature space at line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Whether frequencies count every occurrence or each tweet once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum CountMode {
    #[default]
    Occurrence,
    Document,
}

impl fmt::Display for CountMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountMode::Occurrence => "occurrence",
            CountMode::Document => "document",
        })
    }
}

impl FromStr for CountMode {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "occurrence" => Ok(CountMode::Occurrence),
            "document" => Ok(CountMode::Document),
            other => Err(FeatureError::InvalidThreshold(format!("unknown count mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureKind {
    CharNgram,
    WordNgram,
    SiToken,
}

/// One binary feature.
///
/// Ordering and the textual form (`char\t..`, `word\t..`, `si\t<tag>\t..`)
/// are what selection uses to break ties.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FeatureDescriptor {
    CharNgram(String),
    WordNgram(Vec<String>),
    SiToken { token: String, tag: LanguageTag },
}

impl FeatureDescriptor {
    pub fn kind(&self) -> FeatureKind {
        match self {
            FeatureDescriptor::CharNgram(_) => FeatureKind::CharNgram,
            FeatureDescriptor::WordNgram(_) => FeatureKind::WordNgram,
            FeatureDescriptor::SiToken { .. } => FeatureKind::SiToken,
        }
    }

    pub fn si(token: impl Into<String>, tag: LanguageTag) -> Self {
        FeatureDescriptor::SiToken {
            token: token.into(),
            tag,
        }
    }

    pub fn word<S: AsRef<str>>(tokens: &[S]) -> Self {
        FeatureDescriptor::WordNgram(tokens.iter().map(|s| s.as_ref().to_string()).collect())
    }
}

impl fmt::Display for FeatureDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureDescriptor::CharNgram(g) => write!(f, "char\t{g}"),
            FeatureDescriptor::WordNgram(ws) => write!(f, "word\t{}", ws.join(" ")),
            FeatureDescriptor::SiToken { token, tag } => write!(f, "si\t{tag}\t{token}"),
        }
    }
}

impl PartialOrd for FeatureDescriptor {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FeatureDescriptor {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.to_string().cmp(&other.to_string())
    }
}

impl FromStr for FeatureDescriptor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) = s.split_once('\t').ok_or("missing kind separator")?;
        let non_empty = |x: &str| {
            if x.is_empty() || x.chars().any(char::is_whitespace) {
                Err(format!("invalid feature payload {x:?}"))
            } else {
                Ok(x.to_string())
            }
        };
        match kind {
            "char" => Ok(FeatureDescriptor::CharNgram(non_empty(rest)?)),
            "word" => Ok(FeatureDescriptor::WordNgram(
                rest.split(' ').map(non_empty).collect::<Result<_, _>>()?,
            )),
            "si" => {
                let (tag, token) = rest.split_once('\t').ok_or("missing si tag separator")?;
                let tag = tag.parse::<LanguageTag>().map_err(|e| e.to_string())?;
                Ok(FeatureDescriptor::si(non_empty(token)?, tag))
            }
            other => Err(format!("unknown feature kind {other:?}")),
        }
    }
}

/// A tweet after feature-time preprocessing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparedTweet {
    pub id: String,
    pub tokens: Vec<String>,
    /// Parallel to `tokens` when the tweet was language annotated.
    pub tags: Option<Vec<LanguageTag>>,
    pub stance: Option<StanceLabel>,
}

impl PreparedTweet {
    pub fn new<S: AsRef<str>>(id: impl Into<String>, tokens: &[S]) -> Self {
        PreparedTweet {
            id: id.into(),
            tokens: tokens.iter().map(|s| s.as_ref().to_string()).collect(),
            tags: None,
            stance: None,
        }
    }

    pub fn tagged<S: AsRef<str>>(
        id: impl Into<String>,
        tokens: &[(S, LanguageTag)],
        stance: Option<StanceLabel>,
    ) -> Self {
        PreparedTweet {
            id: id.into(),
            tokens: tokens.iter().map(|(s, _)| s.as_ref().to_string()).collect(),
            tags: Some(tokens.iter().map(|(_, t)| *t).collect()),
            stance,
        }
    }

    fn tagged_tokens(&self) -> Option<impl Iterator<Item = (&str, LanguageTag)>> {
        self.tags
            .as_ref()
            .map(|tags| self.tokens.iter().map(String::as_str).zip(tags.iter().copied()))
    }
}

/// Preprocesses one tweet. Annotated tokens are used when present;
/// otherwise the raw text is tokenized and the result carries no tags.
pub fn prepare_tweet(tweet: &Tweet, stopwords: &StopwordList) -> PreparedTweet {
    if tweet.tokens.is_empty() {
        let tokens = preprocess_for_features(&tokenize(&tweet.raw_text), stopwords);
        PreparedTweet {
            id: tweet.id.clone(),
            tokens,
            tags: None,
            stance: tweet.stance,
        }
    } else {
        let (tokens, tags) = preprocess_annotated(&tweet.tokens, stopwords).into_iter().unzip();
        PreparedTweet {
            id: tweet.id.clone(),
            tokens,
            tags: Some(tags),
            stance: tweet.stance,
        }
    }
}

pub fn prepare_corpus(corpus: &Corpus, stopwords: &StopwordList) -> Vec<PreparedTweet> {
    corpus.tweets().iter().map(|t| prepare_tweet(t, stopwords)).collect()
}

/// Extraction thresholds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Thresholds {
    pub char_n: RangeInclusive<usize>,
    pub char_min: u64,
    pub word_n: RangeInclusive<usize>,
    pub word_min: u64,
    pub si_min_count: u64,
    pub si_min_score: Score,
    pub count_mode: CountMode,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            char_n: 1..=3,
            char_min: 8,
            word_n: 1..=5,
            word_min: 10,
            si_min_count: 5,
            si_min_score: Score::new(3, 5),
            count_mode: CountMode::Occurrence,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<(), FeatureError> {
        let bad = |m: &str| Err(FeatureError::InvalidThreshold(m.to_string()));
        if *self.char_n.start() < 1 || *self.char_n.end() > 3 || self.char_n.is_empty() {
            return bad("character n-gram range must lie within 1..=3");
        }
        if *self.word_n.start() < 1 || *self.word_n.end() > 5 || self.word_n.is_empty() {
            return bad("word n-gram range must lie within 1..=5");
        }
        if self.si_min_score > Score::from_integer(1) {
            return bad("stance score threshold must be at most 1");
        }
        Ok(())
    }
}

/// Parses a decimal such as `0.6` into an exact fraction.
pub fn parse_score(s: &str) -> Result<Score, FeatureError> {
    let err = || FeatureError::InvalidThreshold(format!("invalid score {s:?}"));
    let s = s.trim();
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(err());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 18 {
        return Err(err());
    }
    let denom = 10u64.pow(frac.len() as u32);
    let int: u64 = if int.is_empty() {
        0
    } else {
        int.parse().map_err(|_| err())?
    };
    let frac_v: u64 = if frac.is_empty() {
        0
    } else {
        frac.parse().map_err(|_| err())?
    };
    let numer = int
        .checked_mul(denom)
        .and_then(|v| v.checked_add(frac_v))
        .ok_or_else(err)?;
    Ok(Score::new(numer, denom))
}

/// Formats an exact score as `n/d`.
pub fn format_score(s: &Score) -> String {
    format!("{}/{}", s.numer(), s.denom())
}

fn parse_fraction(s: &str) -> Result<Score, FeatureError> {
    match s.split_once('/') {
        Some((n, d)) => {
            let err = || FeatureError::InvalidThreshold(format!("invalid fraction {s:?}"));
            let n: u64 = n.parse().map_err(|_| err())?;
            let d: u64 = d.parse().map_err(|_| err())?;
            if d == 0 {
                return Err(err());
            }
            Ok(Score::new(n, d))
        }
        None => parse_score(s),
    }
}

/// Which feature families a space is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FeatureFamilies {
    pub char: bool,
    pub word: bool,
    pub si: bool,
}

impl FeatureFamilies {
    pub const ALL: FeatureFamilies = FeatureFamilies {
        char: true,
        word: true,
        si: true,
    };
}

impl fmt::Display for FeatureFamilies {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = [(self.char, "char"), (self.word, "word"), (self.si, "si")]
            .into_iter()
            .filter_map(|(on, n)| on.then_some(n))
            .collect();
        f.write_str(&names.join(","))
    }
}

fn char_grams(token: &str, n_range: &RangeInclusive<usize>, mut sink: impl FnMut(String)) {
    let chars: Vec<char> = token.chars().collect();
    for n in n_range.clone() {
        for w in chars.windows(n) {
            sink(w.iter().collect());
        }
    }
}

fn count_into<K: std::hash::Hash + Eq + Clone>(counts: &mut HashMap<K, u64>, items: Vec<K>, mode: CountMode) {
    match mode {
        CountMode::Occurrence => {
            for k in items {
                *counts.entry(k).or_insert(0) += 1;
            }
        }
        CountMode::Document => {
            let unique: HashSet<K> = items.into_iter().collect();
            for k in unique {
                *counts.entry(k).or_insert(0) += 1;
            }
        }
    }
}

/// Character n-grams taken within tokens, over Unicode scalar values.
pub fn build_char_ngrams(
    tweets: &[PreparedTweet],
    n_range: RangeInclusive<usize>,
    min_count: u64,
    mode: CountMode,
) -> BTreeSet<FeatureDescriptor> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    for t in tweets {
        let mut grams = Vec::new();
        for tok in &t.tokens {
            char_grams(tok, &n_range, |g| grams.push(g));
        }
        count_into(&mut counts, grams, mode);
    }
    counts
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .map(|(g, _)| FeatureDescriptor::CharNgram(g))
        .collect()
}

/// Contiguous token sequences within one tweet.
pub fn build_word_ngrams(
    tweets: &[PreparedTweet],
    n_range: RangeInclusive<usize>,
    min_count: u64,
    mode: CountMode,
) -> BTreeSet<FeatureDescriptor> {
    let mut counts: HashMap<Vec<String>, u64> = HashMap::new();
    for t in tweets {
        let mut grams = Vec::new();
        for n in n_range.clone() {
            for w in t.tokens.windows(n) {
                grams.push(w.to_vec());
            }
        }
        count_into(&mut counts, grams, mode);
    }
    counts
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .map(|(g, _)| FeatureDescriptor::WordNgram(g))
        .collect()
}

/// Per-label frequencies of a token, indexed by [`StanceLabel::index`].
pub type LabelCounts = [u64; 3];

/// Score of a token given its per-label frequencies: the largest share of
/// its occurrences that falls under a single label.
pub fn score_from_counts(counts: &LabelCounts) -> Option<Score> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return None;
    }
    let best = *counts.iter().max().expect("three labels");
    Some(Score::new(best, total))
}

fn si_label_counts(
    tweets: &[PreparedTweet],
    mode: CountMode,
) -> Result<HashMap<(String, LanguageTag), LabelCounts>, FeatureError> {
    let mut counts: HashMap<(String, LanguageTag), LabelCounts> = HashMap::new();
    for t in tweets {
        let label = t.stance.ok_or_else(|| FeatureError::MissingStance(t.id.clone()))?;
        let tagged = t
            .tagged_tokens()
            .ok_or_else(|| FeatureError::MissingTags(t.id.clone()))?;
        let keys: Vec<(String, LanguageTag)> = tagged.map(|(s, g)| (s.to_string(), g)).collect();
        let keys: Vec<_> = match mode {
            CountMode::Occurrence => keys,
            CountMode::Document => {
                let mut seen = HashSet::new();
                keys.into_iter().filter(|k| seen.insert(k.clone())).collect()
            }
        };
        for k in keys {
            counts.entry(k).or_insert([0; 3])[label.index()] += 1;
        }
    }
    Ok(counts)
}

/// Stance score of `token` over a labeled corpus.
///
/// With `tag = Some(..)` only occurrences carrying that language tag count;
/// with `None` every occurrence of the surface form counts.
pub fn si_score(
    token: &str,
    tag: Option<LanguageTag>,
    tweets: &[PreparedTweet],
    mode: CountMode,
) -> Result<Score, FeatureError> {
    let mut counts: LabelCounts = [0; 3];
    for t in tweets {
        let label = t.stance.ok_or_else(|| FeatureError::MissingStance(t.id.clone()))?;
        let hits = match (tag, t.tags.as_ref()) {
            (None, _) => t.tokens.iter().filter(|s| *s == token).count(),
            (Some(want), Some(tags)) => t
                .tokens
                .iter()
                .zip(tags)
                .filter(|(s, g)| *s == token && **g == want)
                .count(),
            (Some(_), None) => return Err(FeatureError::MissingTags(t.id.clone())),
        } as u64;
        counts[label.index()] += match mode {
            CountMode::Occurrence => hits,
            CountMode::Document => hits.min(1),
        };
    }
    score_from_counts(&counts).ok_or_else(|| FeatureError::UnknownToken(token.to_string()))
}

/// Stance-indicative tokens, mined separately within each language tag.
pub fn build_si_tokens(
    tweets: &[PreparedTweet],
    min_score: Score,
    min_count: u64,
    mode: CountMode,
) -> Result<BTreeSet<FeatureDescriptor>, FeatureError> {
    let counts = si_label_counts(tweets, mode)?;
    Ok(counts
        .into_iter()
        .filter(|(_, c)| {
            let total: u64 = c.iter().sum();
            total >= min_count && score_from_counts(c).is_some_and(|s| s >= min_score)
        })
        .map(|((token, tag), _)| FeatureDescriptor::SiToken { token, tag })
        .collect())
}

/// Identity of the tweets a feature space was fitted on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusFingerprint {
    ids: Vec<String>,
    digest: String,
}

impl CorpusFingerprint {
    pub fn of(tweets: &[PreparedTweet]) -> Self {
        let mut sorted: Vec<&PreparedTweet> = tweets.iter().collect();
        sorted.sort_by(|a, b| a.id.cmp(&b.id));
        let mut hasher = Sha256::new();
        for t in &sorted {
            hasher.update(t.id.as_bytes());
            hasher.update(b"\t");
            hasher.update(t.tokens.join(" ").as_bytes());
            if let Some(tags) = &t.tags {
                let tags: Vec<&str> = tags.iter().map(|g| g.as_str()).collect();
                hasher.update(b"\t");
                hasher.update(tags.join(" ").as_bytes());
            }
            if let Some(s) = t.stance {
                hasher.update(b"\t");
                hasher.update(s.as_str().as_bytes());
            }
            hasher.update(b"\n");
        }
        CorpusFingerprint {
            ids: sorted.iter().map(|t| t.id.clone()).collect(),
            digest: hex::encode(hasher.finalize()),
        }
    }

    /// Sorted ids of the fitting tweets.
    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn contains(&self, id: &str) -> bool {
        self.ids.binary_search_by(|x| x.as_str().cmp(id)).is_ok()
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }
}

/// Sorted active indices of a binary feature vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct FeatureVector {
    dim: usize,
    indices: Vec<u32>,
}

impl FeatureVector {
    /// Builds a vector from arbitrary indices; they are sorted and deduplicated.
    /// Panics if an index is out of range.
    pub fn new(dim: usize, mut indices: Vec<u32>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        assert!(
            indices.last().is_none_or(|&i| (i as usize) < dim),
            "feature index out of range"
        );
        FeatureVector { dim, indices }
    }

    pub fn empty(dim: usize) -> Self {
        FeatureVector {
            dim,
            indices: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn contains(&self, i: u32) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Size of the intersection of two vectors.
    pub fn overlap(&self, other: &FeatureVector) -> usize {
        let (a, b) = (&self.indices, &other.indices);
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }

    /// Squared Euclidean distance, i.e. the symmetric-difference size.
    pub fn squared_distance(&self, other: &FeatureVector) -> usize {
        self.nnz() + other.nnz() - 2 * self.overlap(other)
    }
}

/// Fitted mapping from descriptors to dense indices.
#[derive(Debug, Clone)]
pub struct FeatureSpace {
    descriptors: Vec<FeatureDescriptor>,
    chars: HashMap<String, u32>,
    words: HashMap<Vec<String>, u32>,
    si: HashMap<(String, LanguageTag), u32>,
    thresholds: Thresholds,
    families: FeatureFamilies,
    fitted_on: CorpusFingerprint,
    stopword_hash: String,
}

impl PartialEq for FeatureSpace {
    fn eq(&self, other: &Self) -> bool {
        self.descriptors == other.descriptors
            && self.thresholds == other.thresholds
            && self.families == other.families
            && self.fitted_on == other.fitted_on
            && self.stopword_hash == other.stopword_hash
    }
}

impl FeatureSpace {
    /// Mines descriptors from training tweets. Families are laid out
    /// character, word, then stance tokens, each in descriptor order.
    pub fn fit(
        tweets: &[PreparedTweet],
        thresholds: &Thresholds,
        families: FeatureFamilies,
        stopword_hash: &str,
    ) -> Result<Self, FeatureError> {
        thresholds.validate()?;
        let mut descriptors = Vec::new();
        if families.char {
            descriptors.extend(build_char_ngrams(
                tweets,
                thresholds.char_n.clone(),
                thresholds.char_min,
                thresholds.count_mode,
            ));
        }
        if families.word {
            descriptors.extend(build_word_ngrams(
                tweets,
                thresholds.word_n.clone(),
                thresholds.word_min,
                thresholds.count_mode,
            ));
        }
        if families.si {
            descriptors.extend(build_si_tokens(
                tweets,
                thresholds.si_min_score,
                thresholds.si_min_count,
                thresholds.count_mode,
            )?);
        }
        Ok(Self::from_parts(
            descriptors,
            thresholds.clone(),
            families,
            CorpusFingerprint::of(tweets),
            stopword_hash.to_string(),
        ))
    }

    fn from_parts(
        descriptors: Vec<FeatureDescriptor>,
        thresholds: Thresholds,
        families: FeatureFamilies,
        fitted_on: CorpusFingerprint,
        stopword_hash: String,
    ) -> Self {
        let mut space = FeatureSpace {
            descriptors: Vec::new(),
            chars: HashMap::new(),
            words: HashMap::new(),
            si: HashMap::new(),
            thresholds,
            families,
            fitted_on,
            stopword_hash,
        };
        for d in descriptors {
            let idx = space.descriptors.len() as u32;
            let fresh = match &d {
                FeatureDescriptor::CharNgram(g) => space.chars.insert(g.clone(), idx).is_none(),
                FeatureDescriptor::WordNgram(ws) => space.words.insert(ws.clone(), idx).is_none(),
                FeatureDescriptor::SiToken { token, tag } => space.si.insert((token.clone(), *tag), idx).is_none(),
            };
            debug_assert!(fresh, "duplicate descriptor {d}");
            space.descriptors.push(d);
        }
        space
    }

    /// A new space holding the given descriptors, in the given order.
    pub fn restrict(&self, old_indices: &[usize]) -> FeatureSpace {
        Self::from_parts(
            old_indices.iter().map(|&i| self.descriptors[i].clone()).collect(),
            self.thresholds.clone(),
            self.families,
            self.fitted_on.clone(),
            self.stopword_hash.clone(),
        )
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    pub fn descriptors(&self) -> &[FeatureDescriptor] {
        &self.descriptors
    }

    pub fn index_of(&self, d: &FeatureDescriptor) -> Option<usize> {
        match d {
            FeatureDescriptor::CharNgram(g) => self.chars.get(g),
            FeatureDescriptor::WordNgram(ws) => self.words.get(ws),
            FeatureDescriptor::SiToken { token, tag } => self.si.get(&(token.clone(), *tag)),
        }
        .map(|&i| i as usize)
    }

    pub fn thresholds(&self) -> &Thresholds {
        &self.thresholds
    }

    pub fn families(&self) -> FeatureFamilies {
        self.families
    }

    pub fn fitted_on(&self) -> &CorpusFingerprint {
        &self.fitted_on
    }

    pub fn stopword_hash(&self) -> &str {
        &self.stopword_hash
    }

    /// Digest identifying this exact space; models record it.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.header_lines().as_bytes());
        for d in &self.descriptors {
            hasher.update(d.to_string().as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }

    /// Binary presence vector of a prepared tweet.
    pub fn vectorize(&self, tweet: &PreparedTweet) -> FeatureVector {
        let mut active = Vec::new();
        if !self.chars.is_empty() {
            let n_range = self.thresholds.char_n.clone();
            for tok in &tweet.tokens {
                char_grams(tok, &n_range, |g| {
                    if let Some(&i) = self.chars.get(&g) {
                        active.push(i);
                    }
                });
            }
        }
        if !self.words.is_empty() {
            for n in self.thresholds.word_n.clone() {
                for w in tweet.tokens.windows(n) {
                    if let Some(&i) = self.words.get(w) {
                        active.push(i);
                    }
                }
            }
        }
        if !self.si.is_empty() {
            if let Some(tagged) = tweet.tagged_tokens() {
                for (s, g) in tagged {
                    if let Some(&i) = self.si.get(&(s.to_string(), g)) {
                        active.push(i);
                    }
                }
            }
        }
        FeatureVector::new(self.len(), active)
    }

    fn header_lines(&self) -> String {
        let t = &self.thresholds;
        format!(
            "char_n={}-{}\nchar_min={}\nword_n={}-{}\nword_min={}\nsi_min_count={}\nsi_min_score={}\ncount_mode={}\nfamilies={}\nstopwords={}\nfitted_on={}\nfitted_ids={}\n",
            t.char_n.start(),
            t.char_n.end(),
            t.char_min,
            t.word_n.start(),
            t.word_n.end(),
            t.word_min,
            t.si_min_count,
            format_score(&t.si_min_score),
            t.count_mode,
            self.families,
            self.stopword_hash,
            self.fitted_on.digest,
            self.fitted_on.ids.join(","),
        )
    }

    /// Writes the versioned text form: a header of `key=value` lines, then
    /// `descriptors=<n>` and one descriptor per line.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{FEATURE_SPACE_HEADER}")?;
        w.write_all(self.header_lines().as_bytes())?;
        writeln!(w, "descriptors={}", self.descriptors.len())?;
        for d in &self.descriptors {
            writeln!(w, "{d}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8")
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self, FeatureError> {
        let mut lines = r.lines().enumerate();
        let mut next = |expect: &str| -> Result<(usize, String), FeatureError> {
            match lines.next() {
                Some((i, line)) => Ok((i + 1, line?)),
                None => Err(FeatureError::Format {
                    line: 0,
                    message: format!("unexpected end of input, expected {expect}"),
                }),
            }
        };
        let fmt_err = |line: usize, message: String| FeatureError::Format { line, message };

        let (ln, header) = next("header")?;
        if header != FEATURE_SPACE_HEADER {
            return Err(fmt_err(ln, format!("unsupported header {header:?}")));
        }
        let mut field = |key: &str| -> Result<(usize, String), FeatureError> {
            let (ln, line) = next(key)?;
            match line.split_once('=') {
                Some((k, v)) if k == key => Ok((ln, v.to_string())),
                _ => Err(fmt_err(ln, format!("expected `{key}=`"))),
            }
        };
        let range = |(ln, v): (usize, String)| -> Result<RangeInclusive<usize>, FeatureError> {
            let (a, b) = v.split_once('-').ok_or_else(|| fmt_err(ln, "bad range".into()))?;
            let a = a.parse().map_err(|_| fmt_err(ln, "bad range".into()))?;
            let b = b.parse().map_err(|_| fmt_err(ln, "bad range".into()))?;
            Ok(a..=b)
        };
        let num = |(ln, v): (usize, String)| -> Result<u64, FeatureError> {
            v.parse().map_err(|_| fmt_err(ln, format!("bad number {v:?}")))
        };

        let char_n = range(field("char_n")?)?;
        let char_min = num(field("char_min")?)?;
        let word_n = range(field("word_n")?)?;
        let word_min = num(field("word_min")?)?;
        let si_min_count = num(field("si_min_count")?)?;
        let si_min_score = parse_fraction(&field("si_min_score")?.1)?;
        let (ln, mode) = field("count_mode")?;
        let count_mode = mode.parse().map_err(|e: FeatureError| fmt_err(ln, e.to_string()))?;
        let (ln, fam) = field("families")?;
        let mut families = FeatureFamilies {
            char: false,
            word: false,
            si: false,
        };
        for name in fam.split(',').filter(|s| !s.is_empty()) {
            match name {
                "char" => families.char = true,
                "word" => families.word = true,
                "si" => families.si = true,
                other => return Err(fmt_err(ln, format!("unknown family {other:?}"))),
            }
        }
        let stopword_hash = field("stopwords")?.1;
        let digest = field("fitted_on")?.1;
        let ids_line = field("fitted_ids")?.1;
        let ids: Vec<String> = ids_line
            .split(',')
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        let count = num(field("descriptors")?)?;

        let mut descriptors = Vec::with_capacity(count as usize);
        let mut seen = HashSet::new();
        for _ in 0..count {
            let (ln, line) = next("descriptor")?;
            let d: FeatureDescriptor = line.parse().map_err(|m| fmt_err(ln, m))?;
            if !seen.insert(d.clone()) {
                return Err(fmt_err(ln, format!("duplicate descriptor {d}")));
            }
            descriptors.push(d);
        }
        if let Some((ln, Ok(extra))) = lines.next() {
            if !extra.is_empty() {
                return Err(fmt_err(ln + 1, "trailing content".into()));
            }
        }
        let thresholds = Thresholds {
            char_n,
            char_min,
            word_n,
            word_min,
            si_min_count,
            si_min_score,
            count_mode,
        };
        thresholds.validate()?;
        Ok(Self::from_parts(
            descriptors,
            thresholds,
            families,
            CorpusFingerprint { ids, digest },
            stopword_hash,
        ))
    }
}
