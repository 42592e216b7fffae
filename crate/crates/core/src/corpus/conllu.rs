use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;

use super::{AnnotatedToken, CorpusError, SpeechRecord};

/// The universal part-of-speech inventory.
pub const UPOS_TAGS: [&str; 17] = [
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM", "PART", "PRON", "PROPN",
    "PUNCT", "SCONJ", "SYM", "VERB", "X",
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnnotationReport {
    /// Records that received tokens.
    pub matched: usize,
    /// Records left without annotations.
    pub unmatched: usize,
    /// Utterance ids present in the annotations but not among the records.
    pub unknown_ids: Vec<String>,
}

/// Reads CoNLL-U blocks keyed to utterance ids and attaches their tokens.
///
/// A block is assigned to an utterance by a `# utterance_id = <id>` comment,
/// or by `# sent_id = <id>` / `# sent_id = <id>.<n>` when no utterance id
/// has been declared. Multiword ranges (`1-2`) and empty nodes (`1.1`) are
/// skipped. Records whose id never appears are left untouched.
pub fn attach_annotations<R: BufRead>(
    records: &mut [SpeechRecord],
    annotations: R,
) -> Result<AnnotationReport, CorpusError> {
    let blocks = read_blocks(annotations)?;

    let index: HashMap<&str, usize> = records.iter().enumerate().map(|(i, r)| (r.id.as_str(), i)).collect();
    let mut resolved: BTreeMap<usize, Vec<AnnotatedToken>> = BTreeMap::new();
    let mut unknown_ids = Vec::new();

    for (key, tokens) in blocks {
        let target = index.get(key.as_str()).copied().or_else(|| {
            key.rsplit_once('.')
                .and_then(|(prefix, _)| index.get(prefix).copied())
        });
        match target {
            Some(i) => resolved.entry(i).or_default().extend(tokens),
            None => {
                if !unknown_ids.contains(&key) {
                    unknown_ids.push(key);
                }
            }
        }
    }

    let matched = resolved.len();
    for (i, tokens) in resolved {
        records[i].tokens = Some(tokens);
    }
    Ok(AnnotationReport {
        matched,
        unmatched: records.len() - matched,
        unknown_ids,
    })
}

fn read_blocks<R: BufRead>(reader: R) -> Result<Vec<(String, Vec<AnnotatedToken>)>, CorpusError> {
    let mut blocks: Vec<(String, Vec<AnnotatedToken>)> = Vec::new();
    let mut utterance: Option<String> = None;
    let mut sentence: Option<String> = None;
    let mut current: Vec<AnnotatedToken> = Vec::new();

    let flush = |blocks: &mut Vec<(String, Vec<AnnotatedToken>)>,
                 key: Option<String>,
                 tokens: &mut Vec<AnnotatedToken>,
                 line: usize|
     -> Result<(), CorpusError> {
        if tokens.is_empty() {
            return Ok(());
        }
        let key = key.ok_or_else(|| CorpusError::Annotation {
            line,
            message: "tokens before any utterance_id or sent_id comment".into(),
        })?;
        blocks.push((key, std::mem::take(tokens)));
        Ok(())
    };

    let mut lineno = 0;
    for line in reader.lines() {
        lineno += 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(&mut blocks, utterance.clone().or(sentence.take()), &mut current, lineno)?;
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                match key.trim() {
                    "utterance_id" | "newdoc id" => {
                        flush(&mut blocks, utterance.clone().or(sentence.take()), &mut current, lineno)?;
                        utterance = Some(value.trim().to_string());
                    }
                    "sent_id" => sentence = Some(value.trim().to_string()),
                    _ => {}
                }
            }
            continue;
        }

        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(CorpusError::Annotation {
                line: lineno,
                message: format!("expected 10 tab-separated columns, found {}", cols.len()),
            });
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let upos = cols[3];
        if !UPOS_TAGS.contains(&upos) {
            return Err(CorpusError::Annotation {
                line: lineno,
                message: format!("unknown UPOS tag {upos:?}"),
            });
        }
        current.push(AnnotatedToken {
            surface: cols[1].to_string(),
            lemma: cols[2].to_string(),
            upos: upos.to_string(),
        });
    }
    flush(&mut blocks, utterance.or(sentence), &mut current, lineno)?;
    Ok(blocks)
}
