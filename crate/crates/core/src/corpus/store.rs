use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{CorpusError, SpeechRecord};

/// Writes records as line-delimited JSON, one record per line.
pub fn write_speeches<'a, W, I>(out: W, records: I) -> Result<(), CorpusError>
where
    W: Write,
    I: IntoIterator<Item = &'a SpeechRecord>,
{
    let mut out = BufWriter::new(out);
    for record in records {
        serde_json::to_writer(&mut out, record).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn persist_speeches(records: &[SpeechRecord], path: &Path) -> Result<(), CorpusError> {
    write_speeches(File::create(path)?, records)
}

pub fn load_speeches(path: &Path) -> Result<Vec<SpeechRecord>, CorpusError> {
    SpeechReader::open(path)?.collect()
}

/// Streams records from a JSONL store without loading the whole file.
pub struct SpeechReader<R> {
    lines: std::io::Lines<R>,
    line: usize,
}

impl SpeechReader<BufReader<File>> {
    pub fn open(path: &Path) -> Result<Self, CorpusError> {
        Ok(Self::new(BufReader::new(File::open(path)?)))
    }
}

impl<R: BufRead> SpeechReader<R> {
    pub fn new(reader: R) -> Self {
        SpeechReader { lines: reader.lines(), line: 0 }
    }
}

impl<R: BufRead> Iterator for SpeechReader<R> {
    type Item = Result<SpeechRecord, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = self.lines.next()?;
            self.line += 1;
            let line = match line {
                Ok(l) => l,
                Err(e) => return Some(Err(e.into())),
            };
            if line.trim().is_empty() {
                continue;
            }
            return Some(serde_json::from_str(&line).map_err(|e| CorpusError::CorruptLine {
                line: self.line,
                message: e.to_string(),
            }));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::record;
    use crate::corpus::AnnotatedToken;

    #[test]
    fn round_trip_three_records() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("speeches.jsonl");
        let mut recs = vec![record("a", "one two"), record("b", "three"), record("c", "")];
        recs[1].birth_year = None;
        recs[2].tokens = Some(vec![AnnotatedToken {
            surface: "X".into(),
            lemma: "x".into(),
            upos: "NOUN".into(),
        }]);
        persist_speeches(&recs, &path).unwrap();
        assert_eq!(load_speeches(&path).unwrap(), recs);
    }

    #[test]
    fn empty_store() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.jsonl");
        persist_speeches(&[], &path).unwrap();
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 0);
        assert!(load_speeches(&path).unwrap().is_empty());
    }

    #[test]
    fn truncated_line_is_named() {
        let mut buf = Vec::new();
        write_speeches(&mut buf, &[record("a", "x"), record("b", "y")]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let second = text.lines().nth(1).unwrap();
        let broken = format!("{}\n{}\n", text.lines().next().unwrap(), &second[..second.len() / 2]);
        let result: Result<Vec<_>, _> = SpeechReader::new(broken.as_bytes()).collect();
        match result {
            Err(CorpusError::CorruptLine { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected corrupt line, got {other:?}"),
        }
    }
}
