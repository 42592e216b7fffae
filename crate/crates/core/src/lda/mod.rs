//! Latent Dirichlet allocation trained by collapsed Gibbs sampling.
//!
//! The sampler keeps three count tables (term-topic, document-topic and
//! topic totals) plus one topic assignment per token. Tokens of a document
//! are the expansion of its sparse row: each `(term, count)` entry repeated
//! `count` times, in entry order. Assignments in a saved model follow that
//! same order.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`), seeded from the 64-bit
//! config seed, so identical inputs give bit-identical models on every
//! platform. A topic is drawn by inverting the cumulative sum of the
//! unnormalized full conditional: the first topic whose cumulative mass is
//! strictly greater than `u * total` wins.

mod gibbs;
mod sweep;

use std::fs;
use std::io::BufReader;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::preprocess::DocTermMatrix;

pub use gibbs::{train_lda, train_lda_observed, GibbsState};
pub use sweep::{sweep_topic_counts, DiagnosticsRow, SweepDiagnostics, SweepResult, SweepTemplate};

pub const MODEL_FORMAT: &str = "parlascope-lda";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum LdaError {
    #[error("document-term matrix has no tokens")]
    EmptyMatrix,
    #[error("more topics than terms ({k} topics, {v} terms)")]
    TooManyTopics { k: usize, v: usize },
    #[error("invalid LDA config: {0}")]
    Config(String),
    #[error("count invariant violated after sweep {sweep}: {detail}")]
    Invariant { sweep: usize, detail: String },
    #[error("model file {path}: {message}")]
    ModelFile { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Average phi/theta over every post-burn-in sweep instead of using the final state.
    #[serde(default)]
    pub average_samples: bool,
    /// Give each document its own RNG stream (keyed by document id) and
    /// visit documents in id order, so results do not depend on row order.
    #[serde(default)]
    pub per_document_streams: bool,
    /// Verify count conservation after every sweep, not only at start and end.
    /// Always on in debug builds.
    #[serde(default)]
    pub check_every_sweep: bool,
}

impl LdaConfig {
    /// Defaults: alpha = 50/K, beta = 0.01, 1000 sweeps, 200 of them burn-in.
    pub fn new(k: usize) -> Self {
        LdaConfig {
            k,
            alpha: 50.0 / k.max(1) as f64,
            beta: 0.01,
            iterations: 1000,
            burn_in: 200,
            seed: 0,
            average_samples: false,
            per_document_streams: false,
            check_every_sweep: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_iterations(mut self, iterations: usize, burn_in: usize) -> Self {
        self.iterations = iterations;
        self.burn_in = burn_in;
        self
    }

    pub fn with_priors(mut self, alpha: f64, beta: f64) -> Self {
        self.alpha = alpha;
        self.beta = beta;
        self
    }

    pub fn validate(&self) -> Result<(), LdaError> {
        if self.k == 0 {
            return Err(LdaError::Config("K must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) || !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(LdaError::Config("alpha and beta must be positive".into()));
        }
        if self.iterations == 0 || self.burn_in >= self.iterations {
            return Err(LdaError::Config(format!(
                "burn_in ({}) must be smaller than iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if self.k > u16::MAX as usize {
            return Err(LdaError::Config("K is too large".into()));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

/// A trained model: count tables, assignments and the estimated
/// distributions.
///
/// `phi` is topic-major (`phi[k * V + w]`), `theta` is document-major
/// (`theta[d * K + k]`), `n_wk` is term-major (`n_wk[w * K + k]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub format: String,
    pub version: u32,
    pub config: LdaConfig,
    pub config_hash: String,
    #[serde(default)]
    pub vocabulary_hash: Option<String>,
    pub vocab_size: usize,
    pub doc_ids: Vec<String>,
    pub doc_lengths: Vec<u64>,
    pub n_wk: Vec<u32>,
    pub n_dk: Vec<u32>,
    pub n_k: Vec<u64>,
    pub assignments: Vec<Vec<u16>>,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
}

impl TopicModel {
    pub fn k(&self) -> usize {
        self.config.k
    }

    pub fn n_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn n_tokens(&self) -> u64 {
        self.doc_lengths.iter().sum()
    }

    pub fn phi_row(&self, k: usize) -> &[f64] {
        &self.phi[k * self.vocab_size..(k + 1) * self.vocab_size]
    }

    pub fn theta_row(&self, d: usize) -> &[f64] {
        let k = self.k();
        &self.theta[d * k..(d + 1) * k]
    }

    pub fn doc_index(&self, id: &str) -> Option<usize> {
        self.doc_ids.iter().position(|d| d == id)
    }

    /// Share of corpus tokens attributed to each topic: sum over documents
    /// of theta weighted by document length, normalized.
    pub fn topic_proportions(&self) -> Vec<f64> {
        let k = self.k();
        let mut out = vec![0.0; k];
        let total = self.n_tokens() as f64;
        for d in 0..self.n_docs() {
            let len = self.doc_lengths[d] as f64;
            for (o, t) in out.iter_mut().zip(self.theta_row(d)) {
                *o += t * len;
            }
        }
        if total > 0.0 {
            out.iter_mut().for_each(|o| *o /= total);
        } else {
            out.iter_mut().for_each(|o| *o = 1.0 / k as f64);
        }
        out
    }

    pub fn with_vocabulary_hash(mut self, hash: impl Into<String>) -> Self {
        self.vocabulary_hash = Some(hash.into());
        self
    }

    /// Checks count conservation against the training matrix.
    pub fn check_counts(&self, matrix: &DocTermMatrix) -> Result<(), String> {
        gibbs::check_tables(
            self.k(),
            self.vocab_size,
            &self.n_wk,
            &self.n_dk,
            &self.n_k,
            matrix,
            &self.assignments,
        )
    }

    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("model serializes")
    }

    pub fn save(&self, path: &Path) -> Result<(), LdaError> {
        fs::write(path, self.to_json()).map_err(|e| LdaError::ModelFile {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, LdaError> {
        let err = |message: String| LdaError::ModelFile { path: path.display().to_string(), message };
        let file = fs::File::open(path).map_err(|e| err(e.to_string()))?;
        let model: TopicModel = serde_json::from_reader(BufReader::new(file)).map_err(|e| err(e.to_string()))?;
        if model.format != MODEL_FORMAT || model.version != MODEL_VERSION {
            return Err(err(format!("unsupported format {} v{}", model.format, model.version)));
        }
        Ok(model)
    }
}

/// Per-token log-likelihood of a matrix under a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLikelihood {
    pub per_token: f64,
    pub tokens: u64,
    /// Tokens whose term index lies outside the model vocabulary.
    pub oov_tokens: u64,
}

/// `(1/N) * sum over tokens of ln(sum_k theta_dk * phi_kw)`.
///
/// Documents the model was trained on use their fitted theta; any other
/// document gets theta by folding it in with phi held fixed.
pub fn log_likelihood(model: &TopicModel, matrix: &DocTermMatrix) -> LogLikelihood {
    let k = model.k();
    let v = model.vocab_size;
    let index: std::collections::HashMap<&str, usize> =
        model.doc_ids.iter().enumerate().map(|(i, d)| (d.as_str(), i)).collect();

    let mut total = 0.0;
    let mut tokens = 0u64;
    let mut oov = 0u64;
    let mut folded: Vec<f64>;
    for row in &matrix.rows {
        let theta: &[f64] = match index.get(row.id.as_str()) {
            Some(&d) => model.theta_row(d),
            None => {
                folded = gibbs::fold_in(model, row, 50);
                &folded
            }
        };
        for &(w, c) in &row.entries {
            let w = w as usize;
            if w >= v {
                oov += c as u64;
                continue;
            }
            let p: f64 = (0..k).map(|t| theta[t] * model.phi[t * v + w]).sum();
            total += c as f64 * p.ln();
            tokens += c as u64;
        }
    }
    LogLikelihood {
        per_token: if tokens > 0 { total / tokens as f64 } else { 0.0 },
        tokens,
        oov_tokens: oov,
    }
}
