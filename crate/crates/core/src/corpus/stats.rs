use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use super::SpeechRecord;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatsRow {
    pub parliament: String,
    pub year: i32,
    pub sessions: u64,
    pub words: u64,
}

/// Session and word counts per (parliament, year), with margins.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusStats {
    pub rows: Vec<StatsRow>,
}

pub fn corpus_stats(records: &[SpeechRecord]) -> CorpusStats {
    let mut cells: BTreeMap<(&str, i32), (BTreeSet<&str>, u64)> = BTreeMap::new();
    for r in records {
        let cell = cells.entry((r.parliament.as_str(), r.year())).or_default();
        cell.0.insert(r.session_id.as_str());
        cell.1 += r.word_count;
    }
    CorpusStats {
        rows: cells
            .into_iter()
            .map(|((parliament, year), (sessions, words))| StatsRow {
                parliament: parliament.to_string(),
                year,
                sessions: sessions.len() as u64,
                words,
            })
            .collect(),
    }
}

impl CorpusStats {
    pub fn parliament_totals(&self) -> BTreeMap<&str, (u64, u64)> {
        let mut out: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
        for row in &self.rows {
            let t = out.entry(row.parliament.as_str()).or_default();
            t.0 += row.sessions;
            t.1 += row.words;
        }
        out
    }

    pub fn year_totals(&self) -> BTreeMap<i32, (u64, u64)> {
        let mut out: BTreeMap<i32, (u64, u64)> = BTreeMap::new();
        for row in &self.rows {
            let t = out.entry(row.year).or_default();
            t.0 += row.sessions;
            t.1 += row.words;
        }
        out
    }

    pub fn grand_total(&self) -> (u64, u64) {
        self.rows.iter().fold((0, 0), |(s, w), r| (s + r.sessions, w + r.words))
    }

    pub fn get(&self, parliament: &str, year: i32) -> Option<&StatsRow> {
        self.rows.iter().find(|r| r.parliament == parliament && r.year == year)
    }

    /// CSV `parliament,year,sessions,words`; margins use `total` in the
    /// parliament and/or year column.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["parliament", "year", "sessions", "words"])?;
        for r in &self.rows {
            w.write_record([r.parliament.clone(), r.year.to_string(), r.sessions.to_string(), r.words.to_string()])?;
        }
        for (p, (s, words)) in self.parliament_totals() {
            w.write_record([p.to_string(), "total".into(), s.to_string(), words.to_string()])?;
        }
        for (y, (s, words)) in self.year_totals() {
            w.write_record(["total".into(), y.to_string(), s.to_string(), words.to_string()])?;
        }
        if !self.rows.is_empty() {
            let (s, words) = self.grand_total();
            w.write_record(["total".into(), "total".into(), s.to_string(), words.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}
