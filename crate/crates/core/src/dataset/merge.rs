use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{DatasetError, Instance, LabeledDataset, Task};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRow {
    pub text: String,
    pub label: String,
}

/// Anything that yields `(text, raw label)` rows.
pub trait RowSource {
    fn name(&self) -> &str;
    fn rows(&self) -> Result<Vec<RawRow>, DatasetError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MappedLabel {
    Class(u8),
    Discard(DiscardMarker),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiscardMarker {
    Discard,
}

impl MappedLabel {
    pub const DISCARD: MappedLabel = MappedLabel::Discard(DiscardMarker::Discard);
}

/// Raw label -> class 0/1 or discard. Raw labels that are not listed are discarded.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelMapping(pub BTreeMap<String, MappedLabel>);

impl LabelMapping {
    pub fn new<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, MappedLabel)>,
        S: Into<String>,
    {
        LabelMapping(pairs.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn map(&self, raw: &str) -> Option<u8> {
        match self.0.get(raw.trim()) {
            Some(MappedLabel::Class(c)) if *c <= 1 => Some(*c),
            _ => None,
        }
    }
}

pub struct LabeledSource {
    pub source: Box<dyn RowSource>,
    pub mapping: LabelMapping,
    /// Per-class counts the source is documented to contribute.
    pub expected: Option<ClassTotals>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassTotals {
    pub negative: usize,
    pub positive: usize,
    #[serde(default)]
    pub total: Option<usize>,
}

impl ClassTotals {
    pub fn of(negative: usize, positive: usize) -> Self {
        ClassTotals { negative, positive, total: Some(negative + positive) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceCounts {
    pub name: String,
    pub negative: usize,
    pub positive: usize,
    pub discarded: usize,
}

/// A declared number that disagrees with what the sources actually produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discrepancy {
    /// `total.negative`, `total.total`, `<source>.positive`, ...
    pub field: String,
    pub declared: usize,
    pub computed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeReport {
    pub dataset: LabeledDataset,
    pub per_source: Vec<SourceCounts>,
    pub computed: ClassTotals,
    pub declared: Option<ClassTotals>,
    pub discrepancies: Vec<Discrepancy>,
}

fn compare(prefix: &str, declared: &ClassTotals, computed: &ClassTotals, out: &mut Vec<Discrepancy>) {
    let mut check = |field: &str, d: usize, c: usize| {
        if d != c {
            out.push(Discrepancy { field: format!("{prefix}.{field}"), declared: d, computed: c });
        }
    };
    check("negative", declared.negative, computed.negative);
    check("positive", declared.positive, computed.positive);
    if let (Some(d), Some(c)) = (declared.total, computed.total) {
        check("total", d, c);
    }
}

/// Concatenates sources in order (rows in source order), mapping raw labels
/// to 0/1 and recording provenance as `<source>:<row>` (1-based row).
/// Declared totals that do not match the computed ones are reported, not
/// corrected.
pub fn merge_labeled_corpora(
    task: Task,
    sources: &[LabeledSource],
    declared: Option<ClassTotals>,
) -> Result<MergeReport, DatasetError> {
    let mut instances = Vec::new();
    let mut per_source = Vec::new();
    let mut discrepancies = Vec::new();

    for s in sources {
        let name = s.source.name().to_string();
        let rows = s.source.rows()?;
        let mut counts = SourceCounts { name: name.clone(), negative: 0, positive: 0, discarded: 0 };
        for (i, row) in rows.into_iter().enumerate() {
            match s.mapping.map(&row.label) {
                Some(label) => {
                    if label == 0 {
                        counts.negative += 1;
                    } else {
                        counts.positive += 1;
                    }
                    instances.push(Instance { text: row.text, label, source: format!("{name}:{}", i + 1) });
                }
                None => counts.discarded += 1,
            }
        }
        if let Some(expected) = &s.expected {
            compare(&name, expected, &ClassTotals::of(counts.negative, counts.positive), &mut discrepancies);
        }
        per_source.push(counts);
    }

    if instances.is_empty() {
        return Err(DatasetError::EmptyMerge);
    }
    let dataset = LabeledDataset { task, instances };
    let [negative, positive] = dataset.class_counts();
    let computed = ClassTotals::of(negative, positive);
    if let Some(d) = &declared {
        compare("total", d, &computed, &mut discrepancies);
    }
    Ok(MergeReport { dataset, per_source, computed, declared, discrepancies })
}

pub struct InMemorySource {
    pub name: String,
    pub rows: Vec<RawRow>,
}

impl InMemorySource {
    pub fn new(name: impl Into<String>, rows: Vec<RawRow>) -> Self {
        InMemorySource { name: name.into(), rows }
    }
}

impl RowSource for InMemorySource {
    fn name(&self) -> &str {
        &self.name
    }

    fn rows(&self) -> Result<Vec<RawRow>, DatasetError> {
        Ok(self.rows.clone())
    }
}

pub struct CsvSource {
    pub name: String,
    pub path: PathBuf,
    pub text_field: String,
    pub label_field: String,
    pub delimiter: u8,
}

impl RowSource for CsvSource {
    fn name(&self) -> &str {
        &self.name
    }

    fn rows(&self) -> Result<Vec<RawRow>, DatasetError> {
        let err = |message: String| DatasetError::Source { name: self.name.clone(), message };
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(self.delimiter)
            .from_path(&self.path)
            .map_err(|e| err(format!("{}: {e}", self.path.display())))?;
        let headers = reader.headers().map_err(|e| err(e.to_string()))?.clone();
        let col = |field: &str| {
            headers
                .iter()
                .position(|h| h == field)
                .ok_or_else(|| err(format!("missing column {field:?}")))
        };
        let (text_col, label_col) = (col(&self.text_field)?, col(&self.label_field)?);
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| err(e.to_string()))?;
            rows.push(RawRow {
                text: record.get(text_col).unwrap_or_default().to_string(),
                label: record.get(label_col).unwrap_or_default().to_string(),
            });
        }
        Ok(rows)
    }
}

pub struct JsonlSource {
    pub name: String,
    pub path: PathBuf,
    pub text_field: String,
    pub label_field: String,
}

impl RowSource for JsonlSource {
    fn name(&self) -> &str {
        &self.name
    }

    fn rows(&self) -> Result<Vec<RawRow>, DatasetError> {
        let err = |message: String| DatasetError::Source { name: self.name.clone(), message };
        let file = File::open(&self.path).map_err(|e| err(format!("{}: {e}", self.path.display())))?;
        let mut rows = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| err(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let value: serde_json::Value =
                serde_json::from_str(&line).map_err(|e| err(format!("line {}: {e}", i + 1)))?;
            let field = |f: &str| match value.get(f) {
                Some(serde_json::Value::String(s)) => Ok(s.clone()),
                Some(serde_json::Value::Null) | None => Err(err(format!("line {}: missing field {f:?}", i + 1))),
                Some(other) => Ok(other.to_string()),
            };
            rows.push(RawRow { text: field(&self.text_field)?, label: field(&self.label_field)? });
        }
        Ok(rows)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceFormat {
    Csv,
    Tsv,
    Jsonl,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestSource {
    pub name: String,
    pub path: PathBuf,
    pub format: SourceFormat,
    pub text_field: String,
    pub label_field: String,
    pub labels: LabelMapping,
    #[serde(default)]
    pub expected: Option<ClassTotals>,
}

/// Source manifest: which external corpora to merge and how to read them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceManifest {
    pub task: Task,
    pub sources: Vec<ManifestSource>,
    #[serde(default)]
    pub declared: Option<ClassTotals>,
}

impl SourceManifest {
    /// Builds readers; relative paths resolve against `base_dir`.
    pub fn sources(&self, base_dir: &Path) -> Vec<LabeledSource> {
        self.sources
            .iter()
            .map(|s| {
                let path = if s.path.is_absolute() { s.path.clone() } else { base_dir.join(&s.path) };
                let source: Box<dyn RowSource> = match s.format {
                    SourceFormat::Csv | SourceFormat::Tsv => Box::new(CsvSource {
                        name: s.name.clone(),
                        path,
                        text_field: s.text_field.clone(),
                        label_field: s.label_field.clone(),
                        delimiter: if s.format == SourceFormat::Tsv { b'\t' } else { b',' },
                    }),
                    SourceFormat::Jsonl => Box::new(JsonlSource {
                        name: s.name.clone(),
                        path,
                        text_field: s.text_field.clone(),
                        label_field: s.label_field.clone(),
                    }),
                };
                LabeledSource { source, mapping: s.labels.clone(), expected: s.expected }
            })
            .collect()
    }
}

pub fn load_manifest(path: &Path) -> Result<SourceManifest, DatasetError> {
    let file = File::open(path)?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| DatasetError::File {
        path: path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })
}
