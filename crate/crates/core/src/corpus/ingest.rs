use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{attach_annotations, parse_person_list, parse_session_with, CorpusError, SpeakerRegistry, SpeechRecord};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub sessions: usize,
    pub speeches: usize,
    pub person_lists: usize,
    pub annotated: usize,
    pub unannotated: usize,
    pub unknown_annotation_ids: usize,
}

fn sorted_files(dir: &Path, extension: &str) -> Result<Vec<PathBuf>, CorpusError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == extension))
        .collect();
    files.sort();
    Ok(files)
}

fn is_person_list(path: &Path) -> bool {
    path.file_name()
        .and_then(|n| n.to_str())
        .is_some_and(|n| n.contains("listPerson"))
}

/// Reads every `*.xml` session in `corpus_dir` (file-name order). Files
/// named `*listPerson*.xml` are read first as shared speaker metadata.
/// When `annotations_dir` is given, `<stem>.conllu` next to each session
/// stem is attached to that session's speeches.
pub fn ingest_directory(
    corpus_dir: &Path,
    annotations_dir: Option<&Path>,
) -> Result<(Vec<SpeechRecord>, IngestReport), CorpusError> {
    let files = sorted_files(corpus_dir, "xml")?;
    let mut report = IngestReport::default();
    let mut registry = SpeakerRegistry::default();
    for path in files.iter().filter(|p| is_person_list(p)) {
        registry.merge(parse_person_list(&fs::read(path)?)?);
        report.person_lists += 1;
    }

    let mut records = Vec::new();
    for path in files.iter().filter(|p| !is_person_list(p)) {
        let (_, mut speeches) = parse_session_with(&fs::read(path)?, Some(&registry))?;
        report.sessions += 1;
        if let (Some(dir), Some(stem)) = (annotations_dir, path.file_stem()) {
            let conllu = dir.join(stem).with_extension("conllu");
            if conllu.exists() {
                let a = attach_annotations(&mut speeches, BufReader::new(File::open(&conllu)?))?;
                report.unknown_annotation_ids += a.unknown_ids.len();
            }
        }
        records.extend(speeches);
    }
    report.speeches = records.len();
    report.annotated = records.iter().filter(|r| r.tokens.is_some()).count();
    report.unannotated = report.speeches - report.annotated;
    Ok((records, report))
}
