//! Text cleaning and bag-of-words construction.
//!
//! Cleaning runs in three steps: punctuation/case/stopword normalization,
//! removal of domain stopwords, and (when token annotations exist) a part of
//! speech filter that keeps lemmas of content words.

mod vocab;

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{AnnotatedToken, SpeechRecord};

pub use vocab::{build_vocabulary, vectorize, DocRow, DocTermMatrix, TokenizedDoc, Vocabulary};

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("record {0} has no token annotations")]
    Unannotated(String),
    #[error("keep_upos must not be empty when POS filtering is enabled")]
    EmptyKeepSet,
    #[error("min_count must be at least 1")]
    InvalidMinCount,
    #[error("word list {path}: {source}")]
    WordList {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("vocabulary dump: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub const DEFAULT_KEEP_UPOS: [&str; 3] = ["NOUN", "ADJ", "VERB"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanConfig {
    pub language: String,
    pub stopwords: BTreeSet<String>,
    pub domain_stopwords: BTreeSet<String>,
    pub keep_upos: BTreeSet<String>,
    pub min_token_len: usize,
    pub lowercase: bool,
    pub pos_filter: bool,
}

impl Default for CleanConfig {
    fn default() -> Self {
        CleanConfig {
            language: "en".into(),
            stopwords: BTreeSet::new(),
            domain_stopwords: BTreeSet::new(),
            keep_upos: DEFAULT_KEEP_UPOS.iter().map(|s| s.to_string()).collect(),
            min_token_len: 2,
            lowercase: true,
            pos_filter: true,
        }
    }
}

impl CleanConfig {
    /// Loads `<dir>/stopwords/<lang>.txt` and `<dir>/domain_stopwords/<lang>.txt`.
    /// A missing file yields an empty list.
    pub fn for_language(config_dir: &Path, language: &str) -> Result<Self, PreprocessError> {
        let load = |sub: &str| -> Result<BTreeSet<String>, PreprocessError> {
            let path = config_dir.join(sub).join(format!("{language}.txt"));
            if path.exists() {
                load_word_list(&path)
            } else {
                Ok(BTreeSet::new())
            }
        };
        let mut config = CleanConfig {
            language: language.to_string(),
            stopwords: load("stopwords")?,
            domain_stopwords: load("domain_stopwords")?,
            ..Default::default()
        };
        config.lowercase_lists();
        Ok(config)
    }

    pub fn with_stopwords<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.stopwords.extend(words.into_iter().map(Into::into));
        self.lowercase_lists();
        self
    }

    pub fn with_domain_stopwords<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.domain_stopwords.extend(words.into_iter().map(Into::into));
        self.lowercase_lists();
        self
    }

    /// Keeps proper nouns as well.
    pub fn include_propn(mut self, yes: bool) -> Self {
        if yes {
            self.keep_upos.insert("PROPN".into());
        } else {
            self.keep_upos.remove("PROPN");
        }
        self
    }

    pub fn validate(&self) -> Result<(), PreprocessError> {
        if self.pos_filter && self.keep_upos.is_empty() {
            return Err(PreprocessError::EmptyKeepSet);
        }
        Ok(())
    }

    fn lowercase_lists(&mut self) {
        if self.lowercase {
            self.stopwords = self.stopwords.iter().map(|w| w.to_lowercase()).collect();
            self.domain_stopwords = self.domain_stopwords.iter().map(|w| w.to_lowercase()).collect();
        }
    }

    fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token) || self.domain_stopwords.contains(token)
    }
}

/// UTF-8, one term per line, `#` starts a comment.
pub fn load_word_list(path: &Path) -> Result<BTreeSet<String>, PreprocessError> {
    let text = fs::read_to_string(path).map_err(|source| PreprocessError::WordList {
        path: path.display().to_string(),
        source,
    })?;
    Ok(text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

fn punctuation() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[\p{P}\p{S}]+").expect("static regex"))
}

fn clean_token(raw: &str, config: &CleanConfig) -> Vec<String> {
    let stripped = punctuation().replace_all(raw, " ");
    stripped
        .split_whitespace()
        .map(|t| if config.lowercase { t.to_lowercase() } else { t.to_string() })
        .filter(|t| t.chars().count() >= config.min_token_len && !config.is_stopword(t))
        .collect()
}

/// Strips Unicode punctuation and symbols, lowercases, drops stopwords,
/// domain stopwords and tokens shorter than `min_token_len`.
pub fn normalize_tokens(text: &str, config: &CleanConfig) -> Vec<String> {
    clean_token(text, config)
}

/// Lemmas of tokens whose UPOS tag is in `keep_upos`.
pub fn pos_filter(tokens: &[AnnotatedToken], config: &CleanConfig) -> Vec<String> {
    tokens
        .iter()
        .filter(|t| config.keep_upos.contains(&t.upos))
        .map(|t| t.lemma.clone())
        .collect()
}

/// [`pos_filter`] for a record, failing when it carries no annotations.
pub fn pos_filter_record(record: &SpeechRecord, config: &CleanConfig) -> Result<Vec<String>, PreprocessError> {
    let tokens = record
        .tokens
        .as_deref()
        .ok_or_else(|| PreprocessError::Unannotated(record.id.clone()))?;
    Ok(pos_filter(tokens, config))
}

/// Output of the full cleaning pipeline for one record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleanedDoc {
    pub doc: TokenizedDoc,
    /// False when the record had no annotations and the POS step was skipped.
    pub pos_filtered: bool,
}

/// Runs all cleaning steps on one record. Annotated records are POS
/// filtered first and their lemmas then normalized; unannotated records
/// fall back to normalizing the raw text.
pub fn clean_record(record: &SpeechRecord, config: &CleanConfig) -> CleanedDoc {
    let (tokens, pos_filtered) = match (&record.tokens, config.pos_filter) {
        (Some(tokens), true) => {
            let kept = pos_filter(tokens, config);
            (kept.iter().flat_map(|lemma| clean_token(lemma, config)).collect(), true)
        }
        _ => (normalize_tokens(&record.text, config), false),
    };
    CleanedDoc {
        doc: TokenizedDoc { id: record.id.clone(), tokens },
        pos_filtered,
    }
}

/// Summary of a cleaning run: how many records went through the POS step.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanReport {
    pub documents: usize,
    pub pos_filtered: usize,
    pub pos_skipped: usize,
    pub empty_documents: usize,
}

pub fn clean_corpus(records: &[&SpeechRecord], config: &CleanConfig) -> (Vec<TokenizedDoc>, CleanReport) {
    let mut report = CleanReport::default();
    let docs = records
        .iter()
        .map(|r| {
            let cleaned = clean_record(r, config);
            report.documents += 1;
            if cleaned.pos_filtered {
                report.pos_filtered += 1;
            } else {
                report.pos_skipped += 1;
            }
            if cleaned.doc.tokens.is_empty() {
                report.empty_documents += 1;
            }
            cleaned.doc
        })
        .collect();
    (docs, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::record;
    use proptest::prelude::*;

    fn tok(lemma: &str, upos: &str) -> AnnotatedToken {
        AnnotatedToken { surface: lemma.into(), lemma: lemma.into(), upos: upos.into() }
    }

    #[test]
    fn strips_punctuation_case_and_stopwords() {
        let c = CleanConfig::default().with_stopwords(["the"]);
        assert_eq!(normalize_tokens("The Budget, the budget!", &c), vec!["budget", "budget"]);
    }

    #[test]
    fn domain_stopwords_removed() {
        let c = CleanConfig::default().with_stopwords(["a"]).with_domain_stopwords(["make", "deal"]);
        assert!(normalize_tokens("make a deal", &c).is_empty());
    }

    #[test]
    fn empty_text() {
        assert!(normalize_tokens("", &CleanConfig::default()).is_empty());
    }

    #[test]
    fn unicode_punctuation_and_symbols() {
        let c = CleanConfig::default();
        assert_eq!(normalize_tokens("«Бюджет» — €100 + дълг…", &c), vec!["бюджет", "100", "дълг"]);
    }

    #[test]
    fn short_tokens_dropped() {
        let c = CleanConfig::default();
        assert_eq!(normalize_tokens("I a ok", &c), vec!["ok"]);
    }

    #[test]
    fn pos_keeps_content_lemmas() {
        let c = CleanConfig::default();
        let tokens = [tok("budget", "NOUN"), tok("quickly", "ADV"), tok("rise", "VERB")];
        assert_eq!(pos_filter(&tokens, &c), vec!["budget", "rise"]);
    }

    #[test]
    fn all_punct_filtered() {
        let tokens = [tok(",", "PUNCT"), tok(".", "PUNCT")];
        assert!(pos_filter(&tokens, &CleanConfig::default()).is_empty());
    }

    #[test]
    fn propn_excluded_by_default() {
        let tokens = [tok("Stoyanova", "PROPN")];
        assert!(pos_filter(&tokens, &CleanConfig::default()).is_empty());
        let with = CleanConfig::default().include_propn(true);
        assert_eq!(pos_filter(&tokens, &with), vec!["Stoyanova"]);
    }

    #[test]
    fn unannotated_record_is_error() {
        let r = record("x", "text");
        assert!(matches!(pos_filter_record(&r, &CleanConfig::default()), Err(PreprocessError::Unannotated(_))));
    }

    #[test]
    fn clean_record_falls_back_without_annotations() {
        let c = CleanConfig::default().with_stopwords(["the"]);
        let mut r = record("x", "The Budget rises");
        let plain = clean_record(&r, &c);
        assert!(!plain.pos_filtered);
        assert_eq!(plain.doc.tokens, vec!["budget", "rises"]);
        r.tokens = Some(vec![tok("the", "DET"), tok("Budget", "NOUN"), tok("rise", "VERB")]);
        let annotated = clean_record(&r, &c);
        assert!(annotated.pos_filtered);
        assert_eq!(annotated.doc.tokens, vec!["budget", "rise"]);
    }

    #[test]
    fn empty_keep_set_invalid() {
        let mut c = CleanConfig::default();
        c.keep_upos.clear();
        assert!(c.validate().is_err());
        c.pos_filter = false;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn shipped_english_lists_load() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../config");
        let c = CleanConfig::for_language(&dir, "en").unwrap();
        assert!(c.stopwords.contains("the"));
        for w in ["say", "put", "make", "lord", "government"] {
            assert!(c.domain_stopwords.contains(w), "{w}");
        }
        assert!(!c.stopwords.iter().any(|w| w.starts_with('#')));
    }

    proptest! {
        #[test]
        fn normalization_idempotent(text in "\\PC{0,80}") {
            let c = CleanConfig::default().with_stopwords(["the", "and"]);
            let once = normalize_tokens(&text, &c);
            let twice = normalize_tokens(&once.join(" "), &c);
            prop_assert_eq!(once, twice);
        }
    }
}
