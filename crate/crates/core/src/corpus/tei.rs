use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate};
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use serde::{Deserialize, Serialize};

use super::{word_count, CorpusError, Gender, SpeakerRole, SpeakerType, SpeechRecord};

/// Session-level metadata taken from the TEI header.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionMeta {
    pub parliament: String,
    pub session_id: String,
    pub date: NaiveDate,
    pub title: Option<String>,
}

/// Speaker metadata from a `<listPerson>`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpeakerInfo {
    pub name: String,
    pub gender: Option<Gender>,
    pub birth_year: Option<i32>,
    pub speaker_type: Option<SpeakerType>,
    pub party: Option<String>,
}

/// Person id (without the leading `#`) to speaker metadata.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpeakerRegistry {
    people: BTreeMap<String, SpeakerInfo>,
}

impl SpeakerRegistry {
    pub fn get(&self, id: &str) -> Option<&SpeakerInfo> {
        self.people.get(id.trim_start_matches('#'))
    }

    pub fn insert(&mut self, id: impl Into<String>, info: SpeakerInfo) {
        self.people.insert(id.into(), info);
    }

    pub fn len(&self) -> usize {
        self.people.len()
    }

    pub fn is_empty(&self) -> bool {
        self.people.is_empty()
    }

    pub(crate) fn merge(&mut self, other: SpeakerRegistry) {
        self.people.extend(other.people);
    }
}

/// Parses a self-contained session transcript.
pub fn parse_session(tei: &[u8]) -> Result<(SessionMeta, Vec<SpeechRecord>), CorpusError> {
    parse_session_with(tei, None)
}

/// Parses a session transcript, resolving speakers first against the
/// document's own `<listPerson>` and then against `external`.
pub fn parse_session_with(
    tei: &[u8],
    external: Option<&SpeakerRegistry>,
) -> Result<(SessionMeta, Vec<SpeechRecord>), CorpusError> {
    let parsed = Walker::run(tei)?;

    let parliament = parsed
        .parliament
        .or_else(|| parsed.root_id.as_deref().and_then(parliament_from_id))
        .ok_or(CorpusError::Schema { field: "parliament" })?;
    let date = parsed.date.ok_or(CorpusError::Schema { field: "date" })?;
    let session_id = parsed
        .root_id
        .as_deref()
        .map(session_from_id)
        .unwrap_or_else(|| date.to_string());

    let meta = SessionMeta {
        parliament: parliament.clone(),
        session_id: session_id.clone(),
        date,
        title: parsed.title,
    };

    let mut registry = external.cloned().unwrap_or_default();
    registry.merge(parsed.people);

    let records = parsed
        .utterances
        .into_iter()
        .enumerate()
        .map(|(i, u)| {
            let speaker = u.who.as_deref().and_then(|w| registry.get(w));
            let speaker_name = match (speaker, u.who.as_deref()) {
                (Some(s), _) if !s.name.is_empty() => s.name.clone(),
                (_, Some(who)) => who.trim_start_matches('#').to_string(),
                _ => String::new(),
            };
            let birth_year = speaker
                .and_then(|s| s.birth_year)
                .filter(|&y| (1900..=date.year()).contains(&y));
            SpeechRecord {
                id: format!("{}_{}_{}", parliament, session_id, i + 1),
                parliament: parliament.clone(),
                session_id: session_id.clone(),
                date,
                word_count: word_count(&u.text),
                text: u.text,
                tokens: None,
                speaker_name,
                speaker_type: speaker.and_then(|s| s.speaker_type).unwrap_or(SpeakerType::Unknown),
                speaker_role: u.role,
                gender: speaker.and_then(|s| s.gender).unwrap_or(Gender::Unknown),
                birth_year,
                party: speaker.and_then(|s| s.party.clone()).unwrap_or_default(),
            }
        })
        .collect();

    Ok((meta, records))
}

/// Parses a standalone person list (the corpus-level speaker metadata file).
pub fn parse_person_list(tei: &[u8]) -> Result<SpeakerRegistry, CorpusError> {
    Ok(Walker::run(tei)?.people)
}

/// `ParlaMint-BG_2017-05-10-...` -> `BG`
fn parliament_from_id(id: &str) -> Option<String> {
    let rest = id.strip_prefix("ParlaMint-")?;
    let code: String = rest.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
    (code.len() == 2).then(|| code.to_ascii_uppercase())
}

fn session_from_id(id: &str) -> String {
    match id.strip_prefix("ParlaMint-") {
        Some(rest) => match rest.split_once('_') {
            Some((_, session)) if !session.is_empty() => session.to_string(),
            _ => rest.to_string(),
        },
        None => id.to_string(),
    }
}

fn parse_year(when: &str) -> Option<i32> {
    let digits: String = when.trim().chars().take_while(|c| c.is_ascii_digit()).collect();
    if digits.len() == 4 {
        digits.parse().ok()
    } else {
        None
    }
}

fn parse_date(when: &str) -> Option<NaiveDate> {
    let when = when.trim();
    NaiveDate::parse_from_str(when.get(..10).unwrap_or(when), "%Y-%m-%d").ok()
}

struct Utterance {
    who: Option<String>,
    role: SpeakerRole,
    text: String,
}

#[derive(Default)]
struct PersonBuilder {
    id: String,
    info: SpeakerInfo,
    name_parts: Vec<String>,
}

#[derive(Default)]
struct Walker {
    stack: Vec<String>,
    root_id: Option<String>,
    parliament: Option<String>,
    date: Option<NaiveDate>,
    title: Option<String>,
    people: SpeakerRegistry,
    person: Option<PersonBuilder>,
    utterance: Option<(Utterance, Vec<String>)>,
    utterances: Vec<Utterance>,
    /// Depth inside elements whose text is not part of the transcript.
    skip_depth: usize,
    in_parliament_idno: bool,
}

const NON_SPEECH: &[&str] = &["note", "kinesic", "vocal", "incident", "gap", "desc", "head"];

fn local(name: &[u8]) -> String {
    let name = String::from_utf8_lossy(name);
    match name.rsplit_once(':') {
        Some((_, l)) => l.to_string(),
        None => name.into_owned(),
    }
}

impl Walker {
    fn run(tei: &[u8]) -> Result<Walker, CorpusError> {
        let mut reader = Reader::from_reader(tei);
        let mut walker = Walker::default();
        let mut buf = Vec::new();
        loop {
            let event = reader.read_event_into(&mut buf).map_err(|e| CorpusError::Xml {
                offset: reader.error_position(),
                message: e.to_string(),
            })?;
            let offset = reader.buffer_position();
            let xml_err = |message: String| CorpusError::Xml { offset, message };
            match event {
                Event::Start(e) => {
                    walker.open(&e, false).map_err(xml_err)?;
                }
                Event::Empty(e) => {
                    walker.open(&e, true).map_err(xml_err)?;
                }
                Event::End(e) => {
                    let name = local(e.name().as_ref());
                    if walker.stack.last() != Some(&name) {
                        return Err(xml_err(format!("unexpected closing tag </{name}>")));
                    }
                    walker.close();
                }
                Event::Text(t) => {
                    let text = t.unescape().map_err(|e| xml_err(e.to_string()))?;
                    walker.text(&text);
                }
                Event::CData(t) => {
                    let text = String::from_utf8_lossy(&t).into_owned();
                    walker.text(&text);
                }
                Event::Eof => break,
                _ => {}
            }
            buf.clear();
        }
        if let Some(open) = walker.stack.last() {
            return Err(CorpusError::Xml {
                offset: reader.buffer_position(),
                message: format!("unclosed element <{open}>"),
            });
        }
        Ok(walker)
    }

    fn in_header(&self) -> bool {
        self.stack.iter().any(|s| s == "teiHeader")
    }

    fn parent(&self) -> Option<&str> {
        self.stack.last().map(String::as_str)
    }

    fn open(&mut self, e: &BytesStart<'_>, empty: bool) -> Result<(), String> {
        let name = local(e.name().as_ref());
        let mut attrs: BTreeMap<String, String> = BTreeMap::new();
        for attr in e.attributes() {
            let attr = attr.map_err(|err| err.to_string())?;
            let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
            let value = attr.unescape_value().map_err(|err| err.to_string())?.into_owned();
            attrs.insert(key, value);
        }

        if self.stack.is_empty() {
            self.root_id = attrs.get("xml:id").cloned();
        }

        match name.as_str() {
            "idno" if self.in_header() && attrs.get("type").map(String::as_str) == Some("parliament") => {
                self.in_parliament_idno = !empty;
            }
            "date" if self.parent() == Some("setting") && self.date.is_none() => {
                self.date = attrs.get("when").and_then(|w| parse_date(w));
            }
            "person" => {
                self.person = Some(PersonBuilder {
                    id: attrs.get("xml:id").cloned().unwrap_or_default(),
                    ..Default::default()
                });
            }
            "sex" => {
                if let Some(p) = self.person.as_mut() {
                    p.info.gender = attrs.get("value").and_then(|v| match v.as_str() {
                        "F" | "f" => Some(Gender::F),
                        "M" | "m" => Some(Gender::M),
                        _ => None,
                    });
                }
            }
            "birth" => {
                if let Some(p) = self.person.as_mut() {
                    p.info.birth_year = attrs.get("when").and_then(|w| parse_year(w));
                }
            }
            "affiliation" => {
                if let Some(p) = self.person.as_mut() {
                    let role = attrs.get("role").map(String::as_str).unwrap_or("");
                    let target = attrs.get("ref").map(String::as_str).unwrap_or("");
                    match role {
                        "MP" => p.info.speaker_type = Some(SpeakerType::Mp),
                        "guest" => {
                            if p.info.speaker_type.is_none() {
                                p.info.speaker_type = Some(SpeakerType::Guest);
                            }
                        }
                        "member" => {
                            if let Some(party) = target.strip_prefix("#party.") {
                                p.info.party = Some(party.to_string());
                            } else if target.starts_with("#parliament") {
                                p.info.speaker_type = Some(SpeakerType::Mp);
                            }
                        }
                        _ => {}
                    }
                }
            }
            "u" => {
                let role = match attrs.get("ana").map(String::as_str) {
                    Some(a) if a.split_whitespace().any(|t| t == "#chair") => SpeakerRole::Chair,
                    Some(a) if a.split_whitespace().any(|t| t == "#regular") => SpeakerRole::Regular,
                    _ => SpeakerRole::Unknown,
                };
                let u = Utterance {
                    who: attrs.get("who").cloned(),
                    role,
                    text: String::new(),
                };
                self.utterance = Some((u, Vec::new()));
                if empty {
                    self.finish_utterance();
                }
            }
            n if NON_SPEECH.contains(&n) && self.utterance.is_some() && !empty => {
                self.skip_depth += 1;
            }
            _ => {}
        }

        if !empty {
            self.stack.push(name);
        } else if name == "person" {
            self.finish_person();
        }
        Ok(())
    }

    fn close(&mut self) {
        let name = self.stack.pop().unwrap_or_default();
        match name.as_str() {
            "person" => self.finish_person(),
            "u" => self.finish_utterance(),
            "idno" => self.in_parliament_idno = false,
            n if NON_SPEECH.contains(&n) && self.utterance.is_some() && self.skip_depth > 0 => {
                self.skip_depth -= 1;
            }
            _ => {}
        }
    }

    fn text(&mut self, text: &str) {
        if text.trim().is_empty() {
            return;
        }
        let top = self.parent().unwrap_or("").to_string();
        if let Some((_, parts)) = self.utterance.as_mut() {
            if self.skip_depth == 0 {
                parts.push(text.to_string());
            }
            return;
        }
        if let Some(p) = self.person.as_mut() {
            if self.stack.iter().any(|s| s == "persName") {
                p.name_parts.push(text.trim().to_string());
            }
            return;
        }
        if self.in_header() {
            if self.in_parliament_idno && self.parliament.is_none() {
                let code = text.trim();
                if code.len() == 2 && code.chars().all(|c| c.is_ascii_alphabetic()) {
                    self.parliament = Some(code.to_ascii_uppercase());
                }
            } else if top == "title" && self.title.is_none() {
                self.title = Some(text.split_whitespace().collect::<Vec<_>>().join(" "));
            }
        }
    }

    fn finish_person(&mut self) {
        if let Some(mut p) = self.person.take() {
            p.info.name = p.name_parts.join(" ").split_whitespace().collect::<Vec<_>>().join(" ");
            if !p.id.is_empty() {
                self.people.insert(p.id, p.info);
            }
        }
    }

    fn finish_utterance(&mut self) {
        if let Some((mut u, parts)) = self.utterance.take() {
            u.text = parts.join(" ").split_whitespace().collect::<Vec<_>>().join(" ");
            self.utterances.push(u);
        }
        self.skip_depth = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = r##"<?xml version="1.0" encoding="UTF-8"?>
<TEI xmlns="http://www.tei-c.org/ns/1.0" xml:id="ParlaMint-BG_2020-05-01" xml:lang="bg">
  <teiHeader>
    <fileDesc><titleStmt><title>Session 1</title></titleStmt></fileDesc>
    <profileDesc>
      <settingDesc><setting><date when="2020-05-01"/></setting></settingDesc>
      <particDesc><listPerson>
        <person xml:id="StoyanovaMaria">
          <persName><forename>Maria</forename> <surname>Stoyanova</surname></persName>
          <sex value="F"/>
          <birth when="1976-02-11"/>
          <affiliation role="MP" ref="#parliament.BG"/>
          <affiliation role="member" ref="#party.GERB"/>
        </person>
        <person xml:id="PetrovIvan">
          <persName>Ivan Petrov</persName>
          <sex value="M"/>
          <affiliation role="guest"/>
        </person>
      </listPerson></particDesc>
    </profileDesc>
  </teiHeader>
  <text><body><div>
    <u who="#StoyanovaMaria" ana="#regular" xml:id="u1">
      <seg>The budget &amp; the deficit.</seg>
      <note>Applause</note>
      <seg>We vote today.</seg>
    </u>
    <u who="#PetrovIvan" ana="#chair" xml:id="u2"><seg>Thank you.</seg></u>
  </div></body></text>
</TEI>"##;

    #[test]
    fn parses_two_utterances_in_order() {
        let (meta, records) = parse_session(FIXTURE.as_bytes()).unwrap();
        assert_eq!(meta.parliament, "BG");
        assert_eq!(meta.session_id, "2020-05-01");
        assert_eq!(meta.title.as_deref(), Some("Session 1"));
        assert_eq!(records.len(), 2);
        let first = &records[0];
        assert_eq!(first.id, "BG_2020-05-01_1");
        assert_eq!(first.text, "The budget & the deficit. We vote today.");
        assert_eq!(first.word_count, 8);
        assert_eq!(first.speaker_name, "Maria Stoyanova");
        assert_eq!(first.gender, Gender::F);
        assert_eq!(first.gender.class_label(), Some(0));
        assert_eq!(first.birth_year, Some(1976));
        assert_eq!(first.speaker_type, SpeakerType::Mp);
        assert_eq!(first.speaker_role, SpeakerRole::Regular);
        assert_eq!(first.party, "GERB");
        assert_eq!(records[1].id, "BG_2020-05-01_2");
        assert_eq!(records[1].speaker_role, SpeakerRole::Chair);
    }

    #[test]
    fn missing_birth_stays_absent() {
        let (_, records) = parse_session(FIXTURE.as_bytes()).unwrap();
        assert_eq!(records[1].birth_year, None);
        assert_eq!(records[1].speaker_type, SpeakerType::Guest);
        assert_eq!(records[1].party, "");
    }

    #[test]
    fn unknown_speaker_is_explicit() {
        let doc = FIXTURE.replace("#PetrovIvan\" ana=\"#chair\"", "#Nobody\"");
        let (_, records) = parse_session(doc.as_bytes()).unwrap();
        let r = &records[1];
        assert_eq!(r.speaker_name, "Nobody");
        assert_eq!(r.gender, Gender::Unknown);
        assert_eq!(r.speaker_type, SpeakerType::Unknown);
        assert_eq!(r.speaker_role, SpeakerRole::Unknown);
    }

    #[test]
    fn missing_date_is_schema_error() {
        let doc = FIXTURE.replace(r#"<date when="2020-05-01"/>"#, "");
        match parse_session(doc.as_bytes()) {
            Err(CorpusError::Schema { field }) => assert_eq!(field, "date"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn missing_parliament_is_schema_error() {
        let doc = FIXTURE.replace("ParlaMint-BG_2020-05-01", "session-1");
        match parse_session(doc.as_bytes()) {
            Err(CorpusError::Schema { field }) => assert_eq!(field, "parliament"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn explicit_parliament_idno_wins() {
        let doc = FIXTURE
            .replace("ParlaMint-BG_2020-05-01", "session-1")
            .replace("<titleStmt>", r#"<idno type="parliament">cz</idno><titleStmt>"#);
        let (meta, records) = parse_session(doc.as_bytes()).unwrap();
        assert_eq!(meta.parliament, "CZ");
        assert_eq!(meta.session_id, "session-1");
        assert_eq!(records[0].id, "CZ_session-1_1");
    }

    #[test]
    fn malformed_xml_reports_offset() {
        let doc = FIXTURE.replace("</seg></u>", "</u>");
        match parse_session(doc.as_bytes()) {
            Err(CorpusError::Xml { offset, .. }) => assert!(offset > 0),
            other => panic!("expected xml error, got {other:?}"),
        }
    }

    #[test]
    fn birth_year_out_of_range_dropped() {
        let doc = FIXTURE.replace("1976-02-11", "2031");
        let (_, records) = parse_session(doc.as_bytes()).unwrap();
        assert_eq!(records[0].birth_year, None);
    }

    #[test]
    fn external_person_list_resolves_speakers() {
        let list = r##"<listPerson xmlns="http://www.tei-c.org/ns/1.0">
            <person xml:id="X1"><persName>Ana Novak</persName><sex value="F"/><birth when="1950"/>
            <affiliation role="member" ref="#parliament.SI"/><affiliation role="member" ref="#party.SDS"/></person>
        </listPerson>"##;
        let registry = parse_person_list(list.as_bytes()).unwrap();
        assert_eq!(registry.len(), 1);
        let session = r##"<TEI xml:id="ParlaMint-SI_s7"><teiHeader><profileDesc><settingDesc><setting>
            <date when="2019-03-04"/></setting></settingDesc></profileDesc></teiHeader>
            <text><body><u who="#X1" ana="#regular">Dober dan.</u></body></text></TEI>"##;
        let (_, records) = parse_session_with(session.as_bytes(), Some(&registry)).unwrap();
        assert_eq!(records[0].speaker_name, "Ana Novak");
        assert_eq!(records[0].party, "SDS");
        assert_eq!(records[0].speaker_type, SpeakerType::Mp);
        assert_eq!(records[0].birth_year, Some(1950));
    }

    #[test]
    fn deterministic() {
        let a = parse_session(FIXTURE.as_bytes()).unwrap();
        let b = parse_session(FIXTURE.as_bytes()).unwrap();
        assert_eq!(a, b);
    }
}
