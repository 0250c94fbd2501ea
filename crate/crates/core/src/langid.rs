//! Rule- and dictionary-based token language tagging.
//!
//! Each token gets the tag of the first rule that fires:
//!
//! 1. hashtag, mention, URL, emoticon, or a token without letters → `rest`
//! 2. named entity → `rest`
//! 3. in the Hindi word list → `hi`
//! 4. in the English word list → `en`
//! 5. otherwise → `hi`
//!
//! Words that appear in both dictionaries ("to", "main") resolve to `hi`
//! because Hindi dominates the corpus. Under [`HashtagPolicy::Content`] a
//! hashtag whose words are found in the lexicons is tagged by its words.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::corpus::{LanguageTag, TokenAnnotation};
use crate::preprocess::{
    decompose_hashtag, is_emoticon, is_hashtag, is_mention, is_url, read_word_list, PreprocessError,
};

const BUNDLED_ENGLISH: &str = include_str!("../resources/english.txt");
const BUNDLED_HINDI: &str = include_str!("../resources/hindi.txt");
const BUNDLED_NAMED_ENTITIES: &str = include_str!("../resources/named_entities.txt");

#[derive(Debug, Error)]
pub enum LangIdError {
    #[error("the {0} lexicon is empty but dictionary tagging requires it")]
    EmptyLexicon(&'static str),
    #[error(transparent)]
    WordList(#[from] PreprocessError),
    #[error("unknown hashtag policy {0:?} (expected `rest` or `content`)")]
    UnknownPolicy(String),
}

/// How hashtags are tagged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HashtagPolicy {
    /// Always `rest`.
    #[default]
    Rest,
    /// Decompose and tag by the majority of the words found in the lexicons.
    Content,
}

impl fmt::Display for HashtagPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HashtagPolicy::Rest => "rest",
            HashtagPolicy::Content => "content",
        })
    }
}

impl FromStr for HashtagPolicy {
    type Err = LangIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rest" => Ok(HashtagPolicy::Rest),
            "content" => Ok(HashtagPolicy::Content),
            other => Err(LangIdError::UnknownPolicy(other.to_string())),
        }
    }
}

/// The rule that produced a tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TagRule {
    Symbol,
    NamedEntity,
    HindiWord,
    EnglishWord,
    Fallback,
    HashtagContent,
}

impl TagRule {
    /// Position in the rule order; hashtag content overrides rule 1.
    pub fn index(self) -> usize {
        match self {
            TagRule::Symbol | TagRule::HashtagContent => 1,
            TagRule::NamedEntity => 2,
            TagRule::HindiWord => 3,
            TagRule::EnglishWord => 4,
            TagRule::Fallback => 5,
        }
    }
}

fn words(content: &str) -> HashSet<String> {
    content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct LexiconSet {
    english: HashSet<String>,
    hindi: HashSet<String>,
    named_entities: HashSet<String>,
    sources: Vec<PathBuf>,
}

impl LexiconSet {
    pub fn bundled() -> Self {
        LexiconSet {
            english: words(BUNDLED_ENGLISH),
            hindi: words(BUNDLED_HINDI),
            named_entities: words(BUNDLED_NAMED_ENTITIES),
            sources: vec![
                PathBuf::from("<bundled>/english.txt"),
                PathBuf::from("<bundled>/hindi.txt"),
                PathBuf::from("<bundled>/named_entities.txt"),
            ],
        }
    }

    pub fn from_words<E, H, N, S>(english: E, hindi: H, named_entities: N) -> Self
    where
        E: IntoIterator<Item = S>,
        H: IntoIterator<Item = S>,
        N: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let lower =
            |it: &mut dyn Iterator<Item = S>| -> HashSet<String> { it.map(|s| s.as_ref().to_lowercase()).collect() };
        LexiconSet {
            english: lower(&mut english.into_iter()),
            hindi: lower(&mut hindi.into_iter()),
            named_entities: lower(&mut named_entities.into_iter()),
            sources: Vec::new(),
        }
    }

    /// Loads the three word lists; each file must be non-empty.
    pub fn load(english: &Path, hindi: &Path, named_entities: &Path) -> Result<Self, LangIdError> {
        Ok(LexiconSet {
            english: read_word_list(english)?.into_iter().collect(),
            hindi: read_word_list(hindi)?.into_iter().collect(),
            named_entities: read_word_list(named_entities)?.into_iter().collect(),
            sources: vec![english.into(), hindi.into(), named_entities.into()],
        })
    }

    /// Loads `english.txt`, `hindi.txt` and `named_entities.txt` from a directory.
    pub fn load_dir(dir: &Path) -> Result<Self, LangIdError> {
        Self::load(
            &dir.join("english.txt"),
            &dir.join("hindi.txt"),
            &dir.join("named_entities.txt"),
        )
    }

    pub fn is_english(&self, word: &str) -> bool {
        self.english.contains(&word.to_lowercase())
    }

    pub fn is_hindi(&self, word: &str) -> bool {
        self.hindi.contains(&word.to_lowercase())
    }

    pub fn is_named_entity(&self, word: &str) -> bool {
        self.named_entities.contains(&word.to_lowercase())
    }

    pub fn sources(&self) -> &[PathBuf] {
        &self.sources
    }

    /// Dictionary rules 2–5 for a plain word.
    fn tag_word(&self, word: &str) -> (LanguageTag, TagRule) {
        if self.is_named_entity(word) {
            (LanguageTag::Rest, TagRule::NamedEntity)
        } else if self.is_hindi(word) {
            (LanguageTag::Hi, TagRule::HindiWord)
        } else if self.is_english(word) {
            (LanguageTag::En, TagRule::EnglishWord)
        } else {
            (LanguageTag::Hi, TagRule::Fallback)
        }
    }
}

/// Hashtags, mentions, URLs, emoticons and tokens without any letter.
pub fn is_symbolic(token: &str) -> bool {
    is_hashtag(token)
        || is_mention(token)
        || is_url(token)
        || is_emoticon(token)
        || !token.chars().any(char::is_alphabetic)
}

/// Whether `token` is tagged `rest` by the symbol or named-entity rules.
pub fn is_rest(token: &str, lexicons: &LexiconSet) -> bool {
    is_symbolic(token) || lexicons.is_named_entity(token)
}

/// Tags tokens against an immutable lexicon set.
#[derive(Debug, Clone)]
pub struct Tagger<'a> {
    lexicons: &'a LexiconSet,
    policy: HashtagPolicy,
}

impl<'a> Tagger<'a> {
    pub fn new(lexicons: &'a LexiconSet, policy: HashtagPolicy) -> Result<Self, LangIdError> {
        if lexicons.hindi.is_empty() {
            return Err(LangIdError::EmptyLexicon("hindi"));
        }
        if lexicons.english.is_empty() {
            return Err(LangIdError::EmptyLexicon("english"));
        }
        Ok(Tagger { lexicons, policy })
    }

    fn hashtag_by_content(&self, token: &str) -> Option<LanguageTag> {
        let body = &token[1..];
        if self.lexicons.is_named_entity(body) {
            return None;
        }
        let mut counts = [0usize; 3];
        let mut known = false;
        for word in decompose_hashtag(token).ok()? {
            let (tag, rule) = self.lexicons.tag_word(&word);
            known |= rule != TagRule::Fallback;
            counts[match tag {
                LanguageTag::Hi => 0,
                LanguageTag::En => 1,
                LanguageTag::Rest => 2,
            }] += 1;
        }
        if !known {
            return None;
        }
        // ties prefer hi, then en
        let best = (0..3).fold(0, |best, i| if counts[i] > counts[best] { i } else { best });
        Some([LanguageTag::Hi, LanguageTag::En, LanguageTag::Rest][best])
    }

    /// Tags one token and reports the rule that decided it.
    pub fn tag_one(&self, token: &str) -> (LanguageTag, TagRule) {
        if is_hashtag(token) && self.policy == HashtagPolicy::Content {
            if let Some(tag) = self.hashtag_by_content(token) {
                return (tag, TagRule::HashtagContent);
            }
        }
        if is_symbolic(token) {
            return (LanguageTag::Rest, TagRule::Symbol);
        }
        self.lexicons.tag_word(token)
    }

    pub fn tag_with_rules<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<(TokenAnnotation, TagRule)> {
        tokens
            .iter()
            .map(|t| {
                let (tag, rule) = self.tag_one(t.as_ref());
                let ann = TokenAnnotation::new(t.as_ref(), tag)
                    .expect("tokens come from the tokenizer and contain no whitespace");
                (ann, rule)
            })
            .collect()
    }

    pub fn tag<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<TokenAnnotation> {
        self.tag_with_rules(tokens).into_iter().map(|(a, _)| a).collect()
    }
}

/// Tags a tokenized tweet.
pub fn tag_tokens<S: AsRef<str>>(
    tokens: &[S],
    lexicons: &LexiconSet,
    policy: HashtagPolicy,
) -> Result<Vec<TokenAnnotation>, LangIdError> {
    Ok(Tagger::new(lexicons, policy)?.tag(tokens))
}
