//! Bridge to out-of-process scorers.
//!
//! Requests and responses are UTF-8 JSON objects, one per line:
//!
//! ```text
//! -> {"id":"s1","text":"..."}
//! <- {"id":"s1","score":0.93}
//! ```
//!
//! A process scorer receives all requests on stdin (closed afterwards) and
//! answers on stdout. An HTTP scorer receives the same lines as the body of
//! one POST and answers with response lines in the body. Responses may
//! arrive in any order; they are matched back by id.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::ClassifyError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScorerEndpoint {
    Process { command: String, #[serde(default)] args: Vec<String> },
    Http { url: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScorerConfig {
    pub endpoint: ScorerEndpoint,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    /// Extra attempts after a timeout or transport failure.
    #[serde(default = "default_retries")]
    pub retries: u32,
    /// Requests per process launch or POST; 0 sends everything at once.
    #[serde(default)]
    pub batch_size: usize,
}

fn default_timeout_ms() -> u64 {
    60_000
}

fn default_retries() -> u32 {
    2
}

impl ScorerConfig {
    pub fn new(endpoint: ScorerEndpoint) -> Self {
        ScorerConfig { endpoint, timeout_ms: default_timeout_ms(), retries: default_retries(), batch_size: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub id: String,
    pub text: String,
}

#[derive(Deserialize)]
struct ScoreResponse {
    id: String,
    score: f64,
}

/// Matches response lines to `ids`. Blank lines are ignored.
pub fn parse_responses<I, S>(ids: &[String], lines: I) -> Result<Vec<f64>, ClassifyError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let position: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut scores: Vec<Option<f64>> = vec![None; ids.len()];
    for line in lines {
        let line = line.as_ref().trim();
        if line.is_empty() {
            continue;
        }
        let protocol = |message: String| ClassifyError::Protocol { line: line.to_string(), message };
        let resp: ScoreResponse = serde_json::from_str(line).map_err(|e| protocol(e.to_string()))?;
        if !(0.0..=1.0).contains(&resp.score) {
            return Err(protocol(format!("score {} outside [0, 1]", resp.score)));
        }
        let &i = position.get(resp.id.as_str()).ok_or_else(|| protocol(format!("unknown id {:?}", resp.id)))?;
        if scores[i].replace(resp.score).is_some() {
            return Err(protocol(format!("duplicate id {:?}", resp.id)));
        }
    }
    scores
        .into_iter()
        .zip(ids)
        .map(|(s, id)| s.ok_or_else(|| ClassifyError::MissingId(id.clone())))
        .collect()
}

fn request_body(requests: &[ScoreRequest]) -> String {
    let mut body = String::new();
    for r in requests {
        body.push_str(&serde_json::to_string(r).expect("request serializes"));
        body.push('\n');
    }
    body
}

enum Attempt {
    Lines(Vec<String>),
    Timeout,
    Failed(String),
}

fn run_process(command: &str, args: &[String], body: &str, timeout: Duration) -> Attempt {
    let mut child = match Command::new(command)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
    {
        Ok(c) => c,
        Err(e) => return Attempt::Failed(format!("cannot start {command}: {e}")),
    };
    let mut stdin = child.stdin.take().expect("piped stdin");
    let stdout = child.stdout.take().expect("piped stdout");
    let body = body.to_string();
    // a scorer that exits early closes the pipe; missing answers are caught later
    let writer = thread::spawn(move || {
        let _ = stdin.write_all(body.as_bytes());
    });
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let lines: std::io::Result<Vec<String>> = BufReader::new(stdout).lines().collect();
        let _ = tx.send(lines);
    });
    let outcome = match rx.recv_timeout(timeout) {
        Ok(Ok(lines)) => Attempt::Lines(lines),
        Ok(Err(e)) => Attempt::Failed(e.to_string()),
        Err(_) => Attempt::Timeout,
    };
    let _ = child.kill();
    let status = child.wait();
    let _ = writer.join();
    match (outcome, status) {
        (Attempt::Lines(_), Ok(s)) if !s.success() && s.code().is_some() => {
            Attempt::Failed(format!("{command} exited with {s}"))
        }
        (outcome, _) => outcome,
    }
}

fn run_http(url: &str, body: &str, timeout: Duration) -> Attempt {
    let agent: ureq::Agent = ureq::Agent::config_builder().timeout_global(Some(timeout)).build().into();
    match agent.post(url).header("Content-Type", "application/x-ndjson").send(body) {
        Ok(mut resp) => match resp.body_mut().read_to_string() {
            Ok(text) => Attempt::Lines(text.lines().map(str::to_string).collect()),
            Err(ureq::Error::Timeout(_)) => Attempt::Timeout,
            Err(e) => Attempt::Failed(e.to_string()),
        },
        Err(ureq::Error::Timeout(_)) => Attempt::Timeout,
        Err(e) => Attempt::Failed(e.to_string()),
    }
}

fn score_chunk(config: &ScorerConfig, requests: &[ScoreRequest]) -> Result<Vec<f64>, ClassifyError> {
    let body = request_body(requests);
    let ids: Vec<String> = requests.iter().map(|r| r.id.clone()).collect();
    let timeout = Duration::from_millis(config.timeout_ms);
    let mut last_failure = None;
    for attempt in 0..=config.retries {
        let outcome = match &config.endpoint {
            ScorerEndpoint::Process { command, args } => run_process(command, args, &body, timeout),
            ScorerEndpoint::Http { url } => run_http(url, &body, timeout),
        };
        match outcome {
            Attempt::Lines(lines) => return parse_responses(&ids, lines),
            Attempt::Timeout => last_failure = Some(ClassifyError::Timeout { attempts: attempt + 1 }),
            Attempt::Failed(msg) => last_failure = Some(ClassifyError::Scorer(msg)),
        }
    }
    Err(last_failure.expect("at least one attempt"))
}

/// Scores every request through the configured endpoint, in request order.
pub fn external_score(config: &ScorerConfig, requests: &[ScoreRequest]) -> Result<Vec<f64>, ClassifyError> {
    if requests.is_empty() {
        return Ok(Vec::new());
    }
    let chunk = if config.batch_size == 0 { requests.len() } else { config.batch_size };
    let mut scores = Vec::with_capacity(requests.len());
    for part in requests.chunks(chunk) {
        scores.extend(score_chunk(config, part)?);
    }
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Instant;

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn requests(v: &[&str]) -> Vec<ScoreRequest> {
        v.iter().map(|id| ScoreRequest { id: id.to_string(), text: format!("text of {id}") }).collect()
    }

    fn shell(script: &str) -> ScorerConfig {
        let mut cfg = ScorerConfig::new(ScorerEndpoint::Process {
            command: "sh".into(),
            args: vec!["-c".into(), script.into()],
        });
        cfg.timeout_ms = 5_000;
        cfg.retries = 0;
        cfg
    }

    #[test]
    fn echo() {
        assert_eq!(parse_responses(&ids(&["s1"]), [r#"{"id":"s1","score":0.93}"#]).unwrap(), vec![0.93]);
    }

    #[test]
    fn out_of_order_rematched() {
        let lines = [r#"{"id":"c","score":0.3}"#, "", r#"{"id":"a","score":0.1}"#, r#"{"id":"b","score":0.2}"#];
        assert_eq!(parse_responses(&ids(&["a", "b", "c"]), lines).unwrap(), vec![0.1, 0.2, 0.3]);
    }

    #[test]
    fn protocol_errors() {
        let bad = r#"{"id":"s1","score":1.7}"#;
        match parse_responses(&ids(&["s1"]), [bad]) {
            Err(ClassifyError::Protocol { line, .. }) => assert_eq!(line, bad),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_responses(&ids(&["s1"]), ["not json"]), Err(ClassifyError::Protocol { .. })));
        assert!(matches!(
            parse_responses(&ids(&["s1", "s2"]), [r#"{"id":"s1","score":0.5}"#]),
            Err(ClassifyError::MissingId(id)) if id == "s2"
        ));
        assert!(matches!(
            parse_responses(&ids(&["s1"]), [r#"{"id":"zz","score":0.5}"#]),
            Err(ClassifyError::Protocol { .. })
        ));
    }

    #[test]
    fn process_scorer() {
        let cfg = shell(r#"cat >/dev/null; printf '{"id":"b","score":0.25}\n{"id":"a","score":0.75}\n'"#);
        assert_eq!(external_score(&cfg, &requests(&["a", "b"])).unwrap(), vec![0.75, 0.25]);
    }

    #[test]
    fn process_sees_requests() {
        // answers 1.0 for every line that carries the expected request shape
        let mut cfg = shell(r#"while IFS= read -r l; do id=$(printf '%s' "$l" | sed -n 's/^{"id":"\([^"]*\)","text":"text of .*"}$/\1/p'); [ -n "$id" ] && printf '{"id":"%s","score":1.0}\n' "$id"; done"#);
        cfg.batch_size = 2;
        assert_eq!(external_score(&cfg, &requests(&["x", "y", "z"])).unwrap(), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn timeout_after_retries() {
        let mut cfg = shell("sleep 5");
        cfg.timeout_ms = 100;
        cfg.retries = 1;
        let started = Instant::now();
        assert!(matches!(external_score(&cfg, &requests(&["a"])), Err(ClassifyError::Timeout { attempts: 2 })));
        assert!(started.elapsed() < Duration::from_secs(4));
    }

    #[test]
    fn failing_process() {
        let cfg = shell("cat >/dev/null; exit 3");
        assert!(matches!(external_score(&cfg, &requests(&["a"])), Err(ClassifyError::Scorer(_))));
    }

    #[test]
    fn http_scorer() {
        use std::net::TcpListener;
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        thread::spawn(move || {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0usize;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                if line == "\r\n" {
                    break;
                }
            }
            let mut body = vec![0u8; len];
            std::io::Read::read_exact(&mut reader, &mut body).unwrap();
            let body = String::from_utf8(body).unwrap();
            let answer: String = body
                .lines()
                .map(|l| {
                    let req: ScoreRequest = serde_json::from_str(l).unwrap();
                    format!("{{\"id\":\"{}\",\"score\":{}}}\n", req.id, req.text.len() as f64 / 100.0)
                })
                .collect();
            let mut stream = stream;
            write!(stream, "HTTP/1.1 200 OK\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{answer}", answer.len()).unwrap();
        });
        let mut cfg = ScorerConfig::new(ScorerEndpoint::Http { url: format!("http://{addr}/score") });
        cfg.retries = 0;
        cfg.timeout_ms = 5_000;
        assert_eq!(external_score(&cfg, &requests(&["a", "bb"])).unwrap(), vec![0.09, 0.1]);
    }
}
