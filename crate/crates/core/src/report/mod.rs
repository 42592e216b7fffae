//! Score summaries for sampled speeches: polarity shares, histograms and the
//! most extreme speeches for manual checking.

mod render;

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{SpeakerFilter, SpeechRecord};

pub use render::{render_report, ParliamentReport, ReportBundle, ValidationItem};

pub const DEFAULT_NEG_THRESHOLD: f64 = 0.2;
pub const DEFAULT_POS_THRESHOLD: f64 = 0.8;
pub const DEFAULT_BINS: usize = 20;
pub const DEFAULT_SAMPLE_SIZE: usize = 10_000;
pub const DEFAULT_MIN_CHARS: usize = 30;
pub const DEFAULT_TOP_K: usize = 20;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no scores to summarize")]
    Empty,
    #[error("score {0} outside [0, 1]")]
    ScoreRange(f64),
    #[error("thresholds must satisfy 0 < negative < positive < 1 (got {0}, {1})")]
    Thresholds(f64, f64),
    #[error("histogram needs at least 2 bins, got {0}")]
    Bins(usize),
    #[error("k must be at least 1")]
    ZeroK,
    #[error("report needs at least one parliament")]
    NoParliaments,
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSpeech {
    pub id: String,
    pub score: f64,
    pub scorer: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample<'a> {
    pub speeches: Vec<&'a SpeechRecord>,
    pub eligible: usize,
    /// Fewer eligible records than requested; all of them were returned.
    pub shortfall: bool,
}

/// Uniform sample without replacement over regular MPs speaking in `year`
/// with more than `min_chars` characters. Returned in corpus order.
pub fn sample_speeches(records: &[SpeechRecord], year: i32, min_chars: usize, n: usize, seed: u64) -> Sample<'_> {
    let from = NaiveDate::from_ymd_opt(year, 1, 1).expect("valid year");
    let to = NaiveDate::from_ymd_opt(year, 12, 31).expect("valid year");
    let filter = SpeakerFilter::regular_mps()
        .with_date_range(from, to)
        .expect("ordered range")
        .with_min_chars(min_chars);
    let eligible = filter.apply(records);
    let total = eligible.len();
    if total <= n {
        return Sample { speeches: eligible, eligible: total, shortfall: total < n };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, total, n).into_vec();
    picked.sort_unstable();
    Sample { speeches: picked.into_iter().map(|i| eligible[i]).collect(), eligible: total, shortfall: false }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub negative: f64,
    pub positive: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { negative: DEFAULT_NEG_THRESHOLD, positive: DEFAULT_POS_THRESHOLD }
    }
}

impl Thresholds {
    pub fn new(negative: f64, positive: f64) -> Result<Self, ReportError> {
        if !(0.0 < negative && negative < positive && positive < 1.0) {
            return Err(ReportError::Thresholds(negative, positive));
        }
        Ok(Thresholds { negative, positive })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Negative,
    Neutral,
    Positive,
}

impl Thresholds {
    /// Strict on both sides: a score equal to a threshold is neutral.
    pub fn classify(&self, score: f64) -> Polarity {
        if score < self.negative {
            Polarity::Negative
        } else if score > self.positive {
            Polarity::Positive
        } else {
            Polarity::Neutral
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolaritySummary {
    pub n: usize,
    pub negative: usize,
    pub neutral: usize,
    pub positive: usize,
    pub pct_negative: f64,
    pub pct_neutral: f64,
    pub pct_positive: f64,
    pub neg_threshold: f64,
    pub pos_threshold: f64,
}

/// Rounds shares of `n` to hundredths of a percent so they add up to exactly
/// 100.00 (largest remainder, ties to the earlier entry).
fn percentages(counts: [usize; 3], n: usize) -> [f64; 3] {
    let exact: Vec<f64> = counts.iter().map(|&c| c as f64 * 10_000.0 / n as f64).collect();
    let mut units: Vec<u64> = exact.iter().map(|x| x.floor() as u64).collect();
    let missing = 10_000 - units.iter().sum::<u64>();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| (exact[b] - units[b] as f64).total_cmp(&(exact[a] - units[a] as f64)).then(a.cmp(&b)));
    for &i in order.iter().take(missing as usize) {
        units[i] += 1;
    }
    [units[0] as f64 / 100.0, units[1] as f64 / 100.0, units[2] as f64 / 100.0]
}

pub fn polarity_summary(scores: &[f64], thresholds: Thresholds) -> Result<PolaritySummary, ReportError> {
    if scores.is_empty() {
        return Err(ReportError::Empty);
    }
    let mut counts = [0usize; 3];
    for &s in scores {
        if !(0.0..=1.0).contains(&s) {
            return Err(ReportError::ScoreRange(s));
        }
        counts[thresholds.classify(s) as usize] += 1;
    }
    let [pct_negative, pct_neutral, pct_positive] = percentages(counts, scores.len());
    Ok(PolaritySummary {
        n: scores.len(),
        negative: counts[0],
        neutral: counts[1],
        positive: counts[2],
        pct_negative,
        pct_neutral,
        pct_positive,
        neg_threshold: thresholds.negative,
        pos_threshold: thresholds.positive,
    })
}

impl PolaritySummary {
    /// Summary known only by its published percentages (counts left at 0).
    pub fn from_percentages(pct_negative: f64, pct_positive: f64) -> Self {
        let neutral = ((100.0 - pct_negative - pct_positive) * 100.0).round() / 100.0;
        PolaritySummary {
            n: 0,
            negative: 0,
            neutral: 0,
            positive: 0,
            pct_negative,
            pct_neutral: neutral,
            pct_positive,
            neg_threshold: DEFAULT_NEG_THRESHOLD,
            pos_threshold: DEFAULT_POS_THRESHOLD,
        }
    }
}

/// Equal-width bins over [0, 1]; each bin is right-open except the last.
pub fn histogram(scores: &[f64], bins: usize) -> Result<Vec<u64>, ReportError> {
    if bins < 2 {
        return Err(ReportError::Bins(bins));
    }
    let mut counts = vec![0u64; bins];
    for &s in scores {
        if !(0.0..=1.0).contains(&s) {
            return Err(ReportError::ScoreRange(s));
        }
        let i = ((s * bins as f64).floor() as usize).min(bins - 1);
        counts[i] += 1;
    }
    Ok(counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Negative,
    Positive,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Negative => "negative",
            Direction::Positive => "positive",
        })
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "negative" => Ok(Direction::Negative),
            "positive" => Ok(Direction::Positive),
            other => Err(format!("unknown direction {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extremes {
    pub items: Vec<ScoredSpeech>,
    /// Fewer than k speeches were available.
    pub shortfall: bool,
}

/// The k lowest (negative) or highest (positive) scores, ties by id.
pub fn top_k_extreme(scored: &[ScoredSpeech], k: usize, direction: Direction) -> Result<Extremes, ReportError> {
    if k == 0 {
        return Err(ReportError::ZeroK);
    }
    let mut items = scored.to_vec();
    items.sort_by(|a, b| {
        let by_score = match direction {
            Direction::Negative => a.score.total_cmp(&b.score),
            Direction::Positive => b.score.total_cmp(&a.score),
        };
        by_score.then_with(|| a.id.cmp(&b.id))
    });
    let shortfall = items.len() < k;
    items.truncate(k);
    Ok(Extremes { items, shortfall })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{fixtures, SpeakerRole};
    use proptest::prelude::*;

    fn scored(pairs: &[(&str, f64)]) -> Vec<ScoredSpeech> {
        pairs.iter().map(|(id, s)| ScoredSpeech { id: id.to_string(), score: *s, scorer: "t".into() }).collect()
    }

    fn ids(e: &Extremes) -> Vec<&str> {
        e.items.iter().map(|s| s.id.as_str()).collect()
    }

    #[test]
    fn polarity_examples() {
        let s = polarity_summary(&[0.1, 0.1, 0.5, 0.9], Thresholds::default()).unwrap();
        assert_eq!((s.pct_negative, s.pct_neutral, s.pct_positive), (50.0, 25.0, 25.0));
        let s = polarity_summary(&[0.2, 0.8], Thresholds::default()).unwrap();
        assert_eq!(s.neutral, 2);
        let s = polarity_summary(&[0.0; 5], Thresholds::default()).unwrap();
        assert_eq!(s.pct_negative, 100.0);
        assert!(matches!(polarity_summary(&[], Thresholds::default()), Err(ReportError::Empty)));
        assert!(matches!(polarity_summary(&[1.2], Thresholds::default()), Err(ReportError::ScoreRange(_))));
    }

    #[test]
    fn thirds_add_to_hundred() {
        let s = polarity_summary(&[0.1, 0.5, 0.9], Thresholds::default()).unwrap();
        assert_eq!((s.pct_negative, s.pct_neutral, s.pct_positive), (33.34, 33.33, 33.33));
    }

    #[test]
    fn threshold_validation() {
        assert!(Thresholds::new(0.8, 0.2).is_err());
        assert!(Thresholds::new(0.0, 0.5).is_err());
        assert!(Thresholds::new(0.3, 0.7).is_ok());
    }

    #[test]
    fn histogram_examples() {
        assert_eq!(histogram(&[0.0, 1.0], 2).unwrap(), vec![1, 1]);
        assert_eq!(histogram(&[0.5], 2).unwrap(), vec![0, 1]);
        assert!(histogram(&[0.5], 1).is_err());
    }

    #[test]
    fn extremes() {
        let s = scored(&[("a", 0.1), ("b", 0.3), ("c", 0.05)]);
        assert_eq!(ids(&top_k_extreme(&s, 2, Direction::Negative).unwrap()), ["c", "a"]);
        let tie = scored(&[("z", 0.1), ("m", 0.1)]);
        assert_eq!(ids(&top_k_extreme(&tie, 1, Direction::Negative).unwrap()), ["m"]);
        let all = top_k_extreme(&s, 5, Direction::Positive).unwrap();
        assert!(all.shortfall);
        assert_eq!(ids(&all), ["b", "a", "c"]);
    }

    #[test]
    fn sampling() {
        let mut records: Vec<SpeechRecord> = (0..3)
            .map(|i| fixtures::record(&format!("r{i}"), "a speech that is clearly longer than thirty characters"))
            .collect();
        let exact = fixtures::record("short", &"x".repeat(30));
        let mut chair = fixtures::record("chair", &"y".repeat(40));
        chair.speaker_role = SpeakerRole::Chair;
        records.push(exact);
        records.push(chair);

        let sample = sample_speeches(&records, 2020, 30, 2, 9);
        assert_eq!(sample.speeches.len(), 2);
        assert_eq!(sample.eligible, 3);
        assert_ne!(sample.speeches[0].id, sample.speeches[1].id);
        assert_eq!(sample, sample_speeches(&records, 2020, 30, 2, 9));

        let all = sample_speeches(&records, 2020, 30, 10, 9);
        assert!(all.shortfall);
        assert!(all.speeches.iter().all(|r| r.id.starts_with('r')));
        assert!(sample_speeches(&records, 2019, 30, 10, 9).speeches.is_empty());
    }

    proptest! {
        #[test]
        fn polarity_matches_brute_force(scores in prop::collection::vec(0.0f64..=1.0, 1..200)) {
            let s = polarity_summary(&scores, Thresholds::default()).unwrap();
            let neg = scores.iter().filter(|&&x| x < 0.2).count();
            let pos = scores.iter().filter(|&&x| x > 0.8).count();
            prop_assert_eq!((s.negative, s.positive, s.neutral), (neg, pos, scores.len() - neg - pos));
            prop_assert!((s.pct_negative + s.pct_neutral + s.pct_positive - 100.0).abs() < 1e-9);
            prop_assert!((s.pct_negative - 100.0 * neg as f64 / scores.len() as f64).abs() <= 0.01 + 1e-9);
        }

        #[test]
        fn histogram_conserves(scores in prop::collection::vec(0.0f64..=1.0, 0..200), bins in 2usize..40) {
            let h = histogram(&scores, bins).unwrap();
            prop_assert_eq!(h.iter().sum::<u64>() as usize, scores.len());
        }

        #[test]
        fn extremes_mirror(values in prop::collection::vec(0u32..=20, 1..40), k in 1usize..10) {
            let s: Vec<ScoredSpeech> = values.iter().enumerate()
                .map(|(i, &v)| ScoredSpeech { id: format!("{i:03}"), score: v as f64 / 20.0, scorer: "t".into() })
                .collect();
            let flipped: Vec<ScoredSpeech> = s.iter().map(|x| ScoredSpeech { score: 1.0 - x.score, ..x.clone() }).collect();
            let a = top_k_extreme(&s, k, Direction::Negative).unwrap();
            let b = top_k_extreme(&flipped, k, Direction::Positive).unwrap();
            prop_assert_eq!(ids(&a), ids(&b));
        }
    }
}
