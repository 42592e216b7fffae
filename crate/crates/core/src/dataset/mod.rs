//! Balanced binary datasets for metadata prediction and merged
//! sentiment/emotion training corpora.

mod merge;
mod split;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::SpeechRecord;

pub use merge::{
    load_manifest, merge_labeled_corpora, ClassTotals, CsvSource, Discrepancy, InMemorySource, JsonlSource,
    LabelMapping, LabeledSource, MappedLabel, MergeReport, RawRow, RowSource, SourceCounts, SourceManifest,
    ManifestSource, SourceFormat,
};
pub use split::{split_dataset, SplitSpec};

/// Age cut-point: speakers aged 45 or younger are class 0.
pub const AGE_CUT_POINT: i32 = 45;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("insufficient class population for {class}: {available} eligible, {required} required")]
    InsufficientPopulation { class: String, available: usize, required: usize },
    #[error("n_per_class must be positive")]
    NonPositiveSampleSize,
    #[error("task {0} is not built from speech metadata")]
    NotAMetadataTask(Task),
    #[error("the {0} task needs a party-to-wing map")]
    MissingWingMap(Task),
    #[error("source {name}: {message}")]
    Source { name: String, message: String },
    #[error("merged dataset is empty")]
    EmptyMerge,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("cannot stratify: class {label} has {count} instance(s), need at least 2")]
    Stratification { label: u8, count: usize },
    #[error("train_fraction must lie strictly between 0 and 1, got {0}")]
    TrainFraction(f64),
    #[error("label {0} is not binary")]
    BadLabel(u8),
    #[error("{path} line {line}: {message}")]
    File { path: String, line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Age,
    Gender,
    WingCenter,
    WingExtreme,
    Sentiment,
    Emotion,
}

impl Task {
    /// Instances per class drawn when none is requested explicitly.
    pub fn default_per_class(self) -> usize {
        match self {
            Task::Age => 5000,
            _ => 2500,
        }
    }

    pub fn class_names(self) -> [&'static str; 2] {
        match self {
            Task::Age => ["young (label 0, age <= 45)", "older (label 1, age > 45)"],
            Task::Gender => ["female (label 0)", "male (label 1)"],
            Task::WingCenter => ["center-left (label 0)", "center-right (label 1)"],
            Task::WingExtreme => ["extreme-left (label 0)", "extreme-right (label 1)"],
            Task::Sentiment | Task::Emotion => ["negative (label 0)", "positive (label 1)"],
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Age => "age",
            Task::Gender => "gender",
            Task::WingCenter => "wing_center",
            Task::WingExtreme => "wing_extreme",
            Task::Sentiment => "sentiment",
            Task::Emotion => "emotion",
        })
    }
}

impl std::str::FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "age" => Task::Age,
            "gender" => Task::Gender,
            "wing_center" | "wing-center" => Task::WingCenter,
            "wing_extreme" | "wing-extreme" => Task::WingExtreme,
            "sentiment" => Task::Sentiment,
            "emotion" => Task::Emotion,
            other => return Err(format!("unknown task {other:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub text: String,
    pub label: u8,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub task: Task,
    pub instances: Vec<Instance>,
}

impl LabeledDataset {
    pub fn new(task: Task, instances: Vec<Instance>) -> Result<Self, DatasetError> {
        if let Some(bad) = instances.iter().find(|i| i.label > 1) {
            return Err(DatasetError::BadLabel(bad.label));
        }
        Ok(LabeledDataset { task, instances })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Instance count per label: `[label 0, label 1]`.
    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0; 2];
        for i in &self.instances {
            counts[i.label as usize] += 1;
        }
        counts
    }

    /// Line-delimited JSON `{"text":..,"label":0|1,"source":..}`.
    pub fn write_jsonl<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut out = BufWriter::new(out);
        for i in &self.instances {
            serde_json::to_writer(&mut out, i)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    pub fn save(&self, path: &Path) -> Result<(), DatasetError> {
        self.write_jsonl(File::create(path)?)?;
        Ok(())
    }

    pub fn load(task: Task, path: &Path) -> Result<Self, DatasetError> {
        let reader = BufReader::new(File::open(path)?);
        let mut instances = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let inst: Instance = serde_json::from_str(&line).map_err(|e| DatasetError::File {
                path: path.display().to_string(),
                line: i + 1,
                message: e.to_string(),
            })?;
            instances.push(inst);
        }
        LabeledDataset::new(task, instances)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WingPosition {
    ExtremeLeft,
    CenterLeft,
    CenterRight,
    ExtremeRight,
    Other,
}

/// Parliament code -> party name -> political position. Parties that are
/// not listed count as [`WingPosition::Other`] and never enter a wing task.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartyWingMap(pub BTreeMap<String, BTreeMap<String, WingPosition>>);

impl PartyWingMap {
    pub fn position(&self, parliament: &str, party: &str) -> WingPosition {
        self.0
            .get(parliament)
            .and_then(|parties| parties.get(party))
            .copied()
            .unwrap_or(WingPosition::Other)
    }

    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        let file = File::open(path)?;
        serde_json::from_reader(BufReader::new(file)).map_err(|e| DatasetError::File {
            path: path.display().to_string(),
            line: e.line(),
            message: e.to_string(),
        })
    }
}

/// Class of a record for a metadata task, or `None` when the record is not
/// eligible (missing metadata, unmapped party, not a regular MP).
pub fn metadata_label(record: &SpeechRecord, task: Task, wings: Option<&PartyWingMap>) -> Option<u8> {
    if !record.is_regular_mp() {
        return None;
    }
    match task {
        Task::Age => record.speaker_age().map(|age| u8::from(age > AGE_CUT_POINT)),
        Task::Gender => record.gender.class_label(),
        Task::WingCenter | Task::WingExtreme => {
            let position = wings?.position(&record.parliament, &record.party);
            match (task, position) {
                (Task::WingCenter, WingPosition::CenterLeft) | (Task::WingExtreme, WingPosition::ExtremeLeft) => Some(0),
                (Task::WingCenter, WingPosition::CenterRight) | (Task::WingExtreme, WingPosition::ExtremeRight) => Some(1),
                _ => None,
            }
        }
        Task::Sentiment | Task::Emotion => None,
    }
}

/// Draws exactly `n_per_class` speeches per label, uniformly without
/// replacement, from regular MPs whose metadata defines the label.
pub fn build_metadata_task(
    records: &[SpeechRecord],
    task: Task,
    wings: Option<&PartyWingMap>,
    n_per_class: usize,
    seed: u64,
) -> Result<LabeledDataset, DatasetError> {
    if matches!(task, Task::Sentiment | Task::Emotion) {
        return Err(DatasetError::NotAMetadataTask(task));
    }
    if matches!(task, Task::WingCenter | Task::WingExtreme) && wings.is_none() {
        return Err(DatasetError::MissingWingMap(task));
    }
    if n_per_class == 0 {
        return Err(DatasetError::NonPositiveSampleSize);
    }

    let mut seen = HashSet::new();
    let mut pools: [Vec<&SpeechRecord>; 2] = [Vec::new(), Vec::new()];
    for r in records {
        if let Some(label) = metadata_label(r, task, wings) {
            if seen.insert(r.id.as_str()) {
                pools[label as usize].push(r);
            }
        }
    }

    let names = task.class_names();
    for (label, pool) in pools.iter().enumerate() {
        if pool.len() < n_per_class {
            return Err(DatasetError::InsufficientPopulation {
                class: names[label].to_string(),
                available: pool.len(),
                required: n_per_class,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut instances = Vec::with_capacity(2 * n_per_class);
    for (label, pool) in pools.iter().enumerate() {
        for i in index::sample(&mut rng, pool.len(), n_per_class) {
            let r = pool[i];
            instances.push(Instance { text: r.text.clone(), label: label as u8, source: r.id.clone() });
        }
    }
    instances.shuffle(&mut rng);
    Ok(LabeledDataset { task, instances })
}
