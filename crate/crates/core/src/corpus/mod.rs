//! Speech records and everything needed to get them out of session
//! transcripts: TEI parsing, token annotations, the JSONL store and
//! per-parliament word statistics.

mod conllu;
mod ingest;
mod stats;
mod store;
mod tei;

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use conllu::{attach_annotations, AnnotationReport, UPOS_TAGS};
pub use ingest::{ingest_directory, IngestReport};
pub use stats::{corpus_stats, CorpusStats, StatsRow};
pub use store::{load_speeches, persist_speeches, write_speeches, SpeechReader};
pub use tei::{parse_person_list, parse_session, parse_session_with, SessionMeta, SpeakerInfo, SpeakerRegistry};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed XML at byte {offset}: {message}")]
    Xml { offset: u64, message: String },
    #[error("missing required session metadata: {field}")]
    Schema { field: &'static str },
    #[error("annotation line {line}: {message}")]
    Annotation { line: usize, message: String },
    #[error("speech store line {line}: {message}")]
    CorruptLine { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpeakerType {
    #[serde(rename = "MP")]
    Mp,
    #[serde(rename = "guest")]
    Guest,
    #[serde(rename = "unknown")]
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpeakerRole {
    Regular,
    Chair,
    #[serde(rename = "unknown")]
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gender {
    F,
    M,
    #[serde(rename = "unknown")]
    Unknown,
}

impl Gender {
    /// Binary class encoding: 0 for female, 1 for male.
    pub fn class_label(self) -> Option<u8> {
        match self {
            Gender::F => Some(0),
            Gender::M => Some(1),
            Gender::Unknown => None,
        }
    }
}

macro_rules! impl_text_enum {
    ($ty:ty { $($variant:path => $text:literal),+ $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($variant => $text),+ })
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                $(if s.eq_ignore_ascii_case($text) { return Ok($variant); })+
                Err(format!("unrecognised value {s:?}"))
            }
        }
    };
}

impl_text_enum!(SpeakerType { SpeakerType::Mp => "MP", SpeakerType::Guest => "guest", SpeakerType::Unknown => "unknown" });
impl_text_enum!(SpeakerRole { SpeakerRole::Regular => "Regular", SpeakerRole::Chair => "Chair", SpeakerRole::Unknown => "unknown" });
impl_text_enum!(Gender { Gender::F => "F", Gender::M => "M", Gender::Unknown => "unknown" });

/// One token of a linguistically annotated utterance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedToken {
    pub surface: String,
    pub lemma: String,
    pub upos: String,
}

/// One utterance together with the metadata of its speaker.
///
/// `id` has the form `<parliament>_<session>_<utterance-seq>` with a 1-based
/// sequence number in document order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpeechRecord {
    pub id: String,
    pub parliament: String,
    pub session_id: String,
    pub date: NaiveDate,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<Vec<AnnotatedToken>>,
    pub speaker_name: String,
    pub speaker_type: SpeakerType,
    pub speaker_role: SpeakerRole,
    pub gender: Gender,
    #[serde(default)]
    pub birth_year: Option<i32>,
    pub party: String,
    pub word_count: u64,
}

impl SpeechRecord {
    pub fn year(&self) -> i32 {
        self.date.year()
    }

    /// Speaker age in calendar years at the date of the speech.
    pub fn speaker_age(&self) -> Option<i32> {
        self.birth_year.map(|b| self.date.year() - b)
    }

    pub fn char_count(&self) -> usize {
        self.text.chars().count()
    }

    pub fn is_regular_mp(&self) -> bool {
        self.speaker_type == SpeakerType::Mp && self.speaker_role == SpeakerRole::Regular
    }
}

/// Number of whitespace-delimited tokens in raw text.
pub fn word_count(text: &str) -> u64 {
    text.split_whitespace().count() as u64
}

/// Record-level selection used before topic modeling and sampling.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpeakerFilter {
    #[serde(default)]
    pub required_type: Option<SpeakerType>,
    #[serde(default)]
    pub required_role: Option<SpeakerRole>,
    #[serde(default)]
    pub date_range: Option<(NaiveDate, NaiveDate)>,
    /// Text must have strictly more characters than this.
    #[serde(default)]
    pub min_chars: Option<usize>,
}

impl SpeakerFilter {
    /// Full parliament members speaking in a non-chair role.
    pub fn regular_mps() -> Self {
        SpeakerFilter {
            required_type: Some(SpeakerType::Mp),
            required_role: Some(SpeakerRole::Regular),
            ..Default::default()
        }
    }

    pub fn with_date_range(mut self, from: NaiveDate, to: NaiveDate) -> Result<Self, String> {
        if from > to {
            return Err(format!("date range start {from} is after end {to}"));
        }
        self.date_range = Some((from, to));
        Ok(self)
    }

    pub fn with_min_chars(mut self, min_chars: usize) -> Self {
        self.min_chars = Some(min_chars);
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        match self.date_range {
            Some((from, to)) if from > to => Err(format!("date range start {from} is after end {to}")),
            _ => Ok(()),
        }
    }

    pub fn matches(&self, record: &SpeechRecord) -> bool {
        if let Some(t) = self.required_type {
            if record.speaker_type != t {
                return false;
            }
        }
        if let Some(r) = self.required_role {
            if record.speaker_role != r {
                return false;
            }
        }
        if let Some((from, to)) = self.date_range {
            if record.date < from || record.date > to {
                return false;
            }
        }
        if let Some(min) = self.min_chars {
            if record.char_count() <= min {
                return false;
            }
        }
        true
    }

    pub fn apply<'a>(&self, records: &'a [SpeechRecord]) -> Vec<&'a SpeechRecord> {
        records.iter().filter(|r| self.matches(r)).collect()
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn record(id: &str, text: &str) -> SpeechRecord {
        SpeechRecord {
            id: id.to_string(),
            parliament: "BG".into(),
            session_id: "2020-05-01".into(),
            date: NaiveDate::from_ymd_opt(2020, 5, 1).unwrap(),
            text: text.to_string(),
            tokens: None,
            speaker_name: "Speaker".into(),
            speaker_type: SpeakerType::Mp,
            speaker_role: SpeakerRole::Regular,
            gender: Gender::F,
            birth_year: Some(1976),
            party: "GERB".into(),
            word_count: word_count(text),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gender_encoding() {
        assert_eq!(Gender::F.class_label(), Some(0));
        assert_eq!(Gender::M.class_label(), Some(1));
        assert_eq!(Gender::Unknown.class_label(), None);
    }

    #[test]
    fn word_count_is_whitespace_tokens() {
        assert_eq!(word_count("  a  b\tc\n"), 3);
        assert_eq!(word_count(""), 0);
    }

    #[test]
    fn filter_min_chars_is_strict() {
        let thirty = "x".repeat(30);
        let f = SpeakerFilter::regular_mps().with_min_chars(30);
        assert!(!f.matches(&fixtures::record("a", &thirty)));
        assert!(f.matches(&fixtures::record("a", &format!("{thirty}y"))));
    }

    #[test]
    fn filter_rejects_chair() {
        let mut r = fixtures::record("a", "text");
        r.speaker_role = SpeakerRole::Chair;
        assert!(!SpeakerFilter::regular_mps().matches(&r));
    }

    #[test]
    fn inverted_date_range_rejected() {
        let a = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let b = NaiveDate::from_ymd_opt(2019, 1, 1).unwrap();
        assert!(SpeakerFilter::default().with_date_range(a, b).is_err());
    }

    #[test]
    fn enum_text_roundtrip() {
        assert_eq!("MP".parse::<SpeakerType>().unwrap(), SpeakerType::Mp);
        assert_eq!("chair".parse::<SpeakerRole>().unwrap(), SpeakerRole::Chair);
        assert_eq!(Gender::F.to_string(), "F");
    }
}
