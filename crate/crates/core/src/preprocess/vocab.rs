use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PreprocessError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDoc {
    pub id: String,
    pub tokens: Vec<String>,
}

/// Dense term index with corpus frequencies.
///
/// Indices are assigned by descending frequency, ties broken
/// lexicographically, so the same corpus always yields the same indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "VocabularyParts")]
pub struct Vocabulary {
    terms: Vec<String>,
    frequencies: Vec<u64>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

#[derive(Deserialize)]
struct VocabularyParts {
    terms: Vec<String>,
    frequencies: Vec<u64>,
}

impl From<VocabularyParts> for Vocabulary {
    fn from(parts: VocabularyParts) -> Self {
        let mut v = Vocabulary { terms: parts.terms, frequencies: parts.frequencies, index: HashMap::new() };
        v.reindex();
        v
    }
}

impl Vocabulary {
    pub fn from_counts(mut counts: Vec<(String, u64)>) -> Self {
        counts.retain(|(_, f)| *f > 0);
        counts.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        counts.dedup_by(|a, b| a.0 == b.0);
        let (terms, frequencies): (Vec<_>, Vec<_>) = counts.into_iter().unzip();
        let mut v = Vocabulary { terms, frequencies, index: HashMap::new() };
        v.reindex();
        v
    }

    fn reindex(&mut self) {
        self.index = self.terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> Option<&str> {
        self.terms.get(index).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn frequency(&self, index: usize) -> u64 {
        self.frequencies[index]
    }

    pub fn frequencies(&self) -> &[u64] {
        &self.frequencies
    }

    /// Total token count N (sum of frequencies).
    pub fn total(&self) -> u64 {
        self.frequencies.iter().sum()
    }

    /// Marginal corpus probability of term `index`.
    pub fn probability(&self, index: usize) -> f64 {
        self.frequencies[index] as f64 / self.total() as f64
    }

    /// Hex SHA-256 over the ordered term list.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.terms {
            h.update(t.as_bytes());
            h.update([0u8]);
        }
        hex::encode(h.finalize())
    }

    /// CSV `index,term,frequency`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), PreprocessError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "term", "frequency"])?;
        for (i, (t, f)) in self.terms.iter().zip(&self.frequencies).enumerate() {
            w.write_record([i.to_string(), t.clone(), f.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self, PreprocessError> {
        let mut r = csv::Reader::from_reader(input);
        let mut rows: Vec<(usize, String, u64)> = Vec::new();
        for rec in r.deserialize() {
            rows.push(rec?);
        }
        rows.sort_by_key(|r| r.0);
        let (terms, frequencies) = rows.into_iter().map(|(_, t, f)| (t, f)).unzip();
        let mut v = Vocabulary { terms, frequencies, index: HashMap::new() };
        v.reindex();
        Ok(v)
    }
}

/// Indexes every term whose corpus frequency is at least `min_count`.
pub fn build_vocabulary<S: AsRef<str>>(docs: &[Vec<S>], min_count: u64) -> Result<Vocabulary, PreprocessError> {
    if min_count == 0 {
        return Err(PreprocessError::InvalidMinCount);
    }
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for doc in docs {
        for t in doc {
            *counts.entry(t.as_ref()).or_default() += 1;
        }
    }
    Ok(Vocabulary::from_counts(
        counts
            .into_iter()
            .filter(|(_, c)| *c >= min_count)
            .map(|(t, c)| (t.to_string(), c))
            .collect(),
    ))
}

/// One sparse row: `(term_index, count)` sorted by term index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocRow {
    pub id: String,
    pub entries: Vec<(u32, u32)>,
}

impl DocRow {
    pub fn len(&self) -> u64 {
        self.entries.iter().map(|&(_, c)| c as u64).sum()
    }

    /// True when every token of the source document was out of vocabulary.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocTermMatrix {
    pub vocab_size: usize,
    pub rows: Vec<DocRow>,
}

impl DocTermMatrix {
    pub fn n_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_tokens(&self) -> u64 {
        self.rows.iter().map(DocRow::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.n_tokens() == 0
    }

    pub fn empty_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.is_empty()).count()
    }

    /// Column sums: corpus frequency of every term index.
    pub fn term_totals(&self) -> Vec<u64> {
        let mut totals = vec![0u64; self.vocab_size];
        for row in &self.rows {
            for &(w, c) in &row.entries {
                totals[w as usize] += c as u64;
            }
        }
        totals
    }

    /// Rows at the given positions, in that order; out-of-range positions are skipped.
    pub fn subset(&self, keep: &[usize]) -> DocTermMatrix {
        DocTermMatrix {
            vocab_size: self.vocab_size,
            rows: keep.iter().filter_map(|&i| self.rows.get(i).cloned()).collect(),
        }
    }

    /// Writes one JSON row per line after a header line with the vocabulary size.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", serde_json::json!({ "vocab_size": self.vocab_size }))?;
        for row in &self.rows {
            serde_json::to_writer(&mut out, row)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: std::io::BufRead>(input: R) -> std::io::Result<Self> {
        #[derive(Deserialize)]
        struct Header {
            vocab_size: usize,
        }
        let mut lines = input.lines();
        let header: Header = match lines.next() {
            Some(l) => serde_json::from_str(&l?)?,
            None => return Ok(DocTermMatrix::default()),
        };
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: DocRow = serde_json::from_str(&line).map_err(|e| {
                std::io::Error::new(std::io::ErrorKind::InvalidData, format!("matrix line {}: {e}", i + 2))
            })?;
            rows.push(row);
        }
        Ok(DocTermMatrix { vocab_size: header.vocab_size, rows })
    }
}

/// Counts in-vocabulary tokens per document; out-of-vocabulary tokens are dropped.
pub fn vectorize(docs: &[TokenizedDoc], vocabulary: &Vocabulary) -> DocTermMatrix {
    let rows = docs
        .iter()
        .map(|doc| {
            let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
            for t in &doc.tokens {
                if let Some(i) = vocabulary.index_of(t) {
                    *counts.entry(i as u32).or_default() += 1;
                }
            }
            DocRow { id: doc.id.clone(), entries: counts.into_iter().collect() }
        })
        .collect();
    DocTermMatrix { vocab_size: vocabulary.len(), rows }
}
