//! Run configuration file. Every field is optional; command-line flags take
//! precedence over the file, and built-in defaults fill the rest.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use parlascope::classify::ScorerConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::ConfigError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub language: Option<String>,
    /// Directory holding `stopwords/<lang>.txt` and `domain_stopwords/<lang>.txt`.
    pub config_dir: Option<PathBuf>,
    pub clean: CleanSection,
    pub lda: LdaSection,
    pub sweep: SweepSection,
    pub vis: VisSection,
    pub dataset: DatasetSection,
    pub report: ReportSection,
    pub scorer: Option<ScorerConfig>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CleanSection {
    pub include_propn: Option<bool>,
    pub min_token_len: Option<usize>,
    pub pos_filter: Option<bool>,
    pub min_count: Option<u64>,
    pub regular_only: Option<bool>,
    pub parliament: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaSection {
    pub k: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub iterations: Option<usize>,
    pub burn_in: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub k_min: Option<usize>,
    pub k_max: Option<usize>,
    pub holdout_fraction: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VisSection {
    pub top_n: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    pub n_per_class: Option<usize>,
    pub train_fraction: Option<f64>,
    pub wing_map: Option<PathBuf>,
    pub parliament: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    pub year: Option<i32>,
    pub sample_size: Option<usize>,
    pub min_chars: Option<usize>,
    pub top_k: Option<usize>,
    pub bins: Option<usize>,
    pub neg_threshold: Option<f64>,
    pub pos_threshold: Option<f64>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else { return Ok(RunConfig::default()) };
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("config file {}: {e}", path.display())))?;
        let cfg = serde_json::from_str(&text)
            .map_err(|e| ConfigError(format!("config file {}: {e}", path.display())))?;
        Ok(cfg)
    }
}

/// Hex SHA-256 of a value's compact JSON form.
pub fn hash_json<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("config serializes");
    hex::encode(Sha256::digest(bytes))
}

/// Writes `<dir>/run_config.json`: the effective parameters of one command
/// together with their hash and the seed.
pub fn dump_effective<T: Serialize>(dir: &Path, command: &str, seed: Option<u64>, params: &T) -> anyhow::Result<String> {
    let hash = hash_json(params);
    let doc = serde_json::json!({
        "command": command,
        "seed": seed,
        "config_hash": hash,
        "parameters": params,
    });
    let path = dir.join("run_config.json");
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(hash)
}

pub fn require_file(path: &Path, what: &str) -> Result<(), ConfigError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(ConfigError(format!("{what} {} does not exist", path.display())))
    }
}

pub fn require_dir(path: &Path, what: &str) -> Result<(), ConfigError> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(ConfigError(format!("{what} {} is not a directory", path.display())))
    }
}
