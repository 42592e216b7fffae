use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ClassifyError, Prediction, TextClassifier};
use crate::dataset::LabeledDataset;
use crate::preprocess::{normalize_tokens, CleanConfig};

/// Multinomial naive Bayes over cleaned unigrams with add-one smoothing.
///
/// Terms unseen in training are ignored at prediction time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayes {
    pub clean: CleanConfig,
    pub documents: [u64; 2],
    pub term_counts: [BTreeMap<String, u64>; 2],
    pub token_totals: [u64; 2],
    pub vocab_size: usize,
}

pub fn train_baseline(train: &LabeledDataset, clean: &CleanConfig) -> Result<NaiveBayes, ClassifyError> {
    let counts = train.class_counts();
    if counts.contains(&0) {
        return Err(ClassifyError::SingleClass(counts));
    }
    let mut term_counts: [BTreeMap<String, u64>; 2] = Default::default();
    let mut token_totals = [0u64; 2];
    for inst in &train.instances {
        let c = inst.label as usize;
        for token in normalize_tokens(&inst.text, clean) {
            *term_counts[c].entry(token).or_default() += 1;
            token_totals[c] += 1;
        }
    }
    let vocab_size = term_counts[0].keys().chain(term_counts[1].keys()).collect::<std::collections::BTreeSet<_>>().len();
    Ok(NaiveBayes {
        clean: clean.clone(),
        documents: [counts[0] as u64, counts[1] as u64],
        term_counts,
        token_totals,
        vocab_size,
    })
}

impl NaiveBayes {
    /// Unnormalized log posteriors for class 0 and 1.
    pub fn log_joint(&self, text: &str) -> [f64; 2] {
        let n_docs = (self.documents[0] + self.documents[1]) as f64;
        let v = self.vocab_size as f64;
        let tokens = normalize_tokens(text, &self.clean);
        let mut out = [0.0; 2];
        for (c, slot) in out.iter_mut().enumerate() {
            let denom = self.token_totals[c] as f64 + v;
            *slot = (self.documents[c] as f64 / n_docs).ln();
            for t in &tokens {
                if !self.term_counts[0].contains_key(t) && !self.term_counts[1].contains_key(t) {
                    continue;
                }
                let count = self.term_counts[c].get(t).copied().unwrap_or(0) as f64;
                *slot += ((count + 1.0) / denom).ln();
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), ClassifyError> {
        let json = serde_json::to_string_pretty(self).map_err(|e| ClassifyError::ModelFile {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        fs::write(path, json + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ClassifyError> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| ClassifyError::ModelFile {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }
}

impl TextClassifier for NaiveBayes {
    fn predict(&self, text: &str) -> Prediction {
        let [l0, l1] = self.log_joint(text);
        let m = l0.max(l1);
        let (e0, e1) = ((l0 - m).exp(), (l1 - m).exp());
        Prediction::from_score(e1 / (e0 + e1))
    }
}
