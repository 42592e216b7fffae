//! Binary text classifiers, the external scorer bridge and evaluation metrics.
//!
//! Label 1 is the positive class everywhere. A score is the probability of
//! label 1 and maps to label 1 only when strictly above 0.5.

mod bayes;
mod external;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::LabeledDataset;

pub use bayes::{train_baseline, NaiveBayes};
pub use external::{external_score, parse_responses, ScoreRequest, ScorerConfig, ScorerEndpoint};

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("training data must contain both labels (counts {0:?})")]
    SingleClass([usize; 2]),
    #[error("confusion counts are all zero")]
    EmptyConfusion,
    #[error("{predictions} predictions for {labels} labels")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("scorer protocol error on line {line:?}: {message}")]
    Protocol { line: String, message: String },
    #[error("scorer returned no score for id {0}")]
    MissingId(String),
    #[error("scorer timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("scorer failed: {0}")]
    Scorer(String),
    #[error("model file {path}: {message}")]
    ModelFile { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: u8,
    pub score: f64,
}

impl Prediction {
    pub fn from_score(score: f64) -> Self {
        Prediction { label: u8::from(score > 0.5), score }
    }
}

pub trait TextClassifier {
    fn predict(&self, text: &str) -> Prediction;
}

/// Order-preserving batch prediction.
pub fn predict_batch<C: TextClassifier + ?Sized, S: AsRef<str>>(classifier: &C, texts: &[S]) -> Vec<Prediction> {
    texts.iter().map(|t| classifier.predict(t.as_ref())).collect()
}

/// Confusion counts with label 1 as positive, plus derived ratios.
/// Ratios with a zero denominator are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Harmonic mean of precision and recall; `None` when both are zero.
pub fn f1(precision: f64, recall: f64) -> Option<f64> {
    let sum = precision + recall;
    (sum > 0.0).then(|| 2.0 * precision * recall / sum)
}

pub fn compute_metrics(tp: u64, fp: u64, fn_: u64, tn: u64) -> Result<Metrics, ClassifyError> {
    let n = tp + fp + fn_ + tn;
    if n == 0 {
        return Err(ClassifyError::EmptyConfusion);
    }
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) => f1(p, r),
        _ => None,
    };
    Ok(Metrics { tp, fp, fn_, tn, accuracy: (tp + tn) as f64 / n as f64, precision, recall, f1 })
}

/// Metrics for predicted labels against gold labels.
pub fn metrics_from_labels(gold: &[u8], predicted: &[u8]) -> Result<Metrics, ClassifyError> {
    if gold.len() != predicted.len() {
        return Err(ClassifyError::LengthMismatch { predictions: predicted.len(), labels: gold.len() });
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (&g, &p) in gold.iter().zip(predicted) {
        match (g == 1, p == 1) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    compute_metrics(tp, fp, fn_, tn)
}

pub fn evaluate<C: TextClassifier + ?Sized>(classifier: &C, test: &LabeledDataset) -> Result<Metrics, ClassifyError> {
    let texts: Vec<&str> = test.instances.iter().map(|i| i.text.as_str()).collect();
    let predicted: Vec<u8> = predict_batch(classifier, &texts).iter().map(|p| p.label).collect();
    let gold: Vec<u8> = test.instances.iter().map(|i| i.label).collect();
    metrics_from_labels(&gold, &predicted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn round2(x: f64) -> f64 {
        (x * 100.0).round() / 100.0
    }

    #[test]
    fn hand_confusion() {
        let m = compute_metrics(4, 1, 1, 4).unwrap();
        assert_eq!((m.accuracy, m.precision, m.recall), (0.8, Some(0.8), Some(0.8)));
        assert!((m.f1.unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn perfect_and_degenerate() {
        let m = compute_metrics(1, 0, 0, 1).unwrap();
        assert_eq!((m.accuracy, m.precision, m.recall, m.f1), (1.0, Some(1.0), Some(1.0), Some(1.0)));
        let m = compute_metrics(0, 0, 5, 5).unwrap();
        assert_eq!((m.accuracy, m.precision, m.recall, m.f1), (0.5, None, Some(0.0), None));
        assert!(matches!(compute_metrics(0, 0, 0, 0), Err(ClassifyError::EmptyConfusion)));
    }

    #[test]
    fn published_f1_rows() {
        assert_eq!(round2(f1(0.80, 0.61).unwrap()), 0.69);
        assert_eq!(round2(f1(0.83, 0.80).unwrap()), 0.81);
    }

    #[test]
    fn tie_score_is_negative() {
        assert_eq!(Prediction::from_score(0.5).label, 0);
        assert_eq!(Prediction::from_score(0.5000001).label, 1);
    }

    proptest! {
        #[test]
        fn f1_between_precision_and_recall(tp in 0u64..50, fp in 0u64..50, fn_ in 0u64..50, tn in 0u64..50) {
            prop_assume!(tp + fp + fn_ + tn > 0);
            let m = compute_metrics(tp, fp, fn_, tn).unwrap();
            if let (Some(p), Some(r), Some(f)) = (m.precision, m.recall, m.f1) {
                prop_assert!(f >= p.min(r) - 1e-12 && f <= p.max(r) + 1e-12);
                if p == r {
                    prop_assert!((f - p).abs() < 1e-12);
                }
            }
        }
    }
}
