//! Golden explorer payload shared with the TypeScript front end.
//!
//! Set `PARLASCOPE_UPDATE_GOLDEN=1` to rewrite the fixtures.

use std::path::PathBuf;

use parlascope::lda::{train_lda, LdaConfig};
use parlascope::preprocess::{build_vocabulary, vectorize, TokenizedDoc};
use parlascope::vis::{export_vis, VisData};
use serde::{Deserialize, Serialize};

const LAMBDAS: [f64; 4] = [0.0, 0.3, 0.6, 1.0];

#[derive(Debug, PartialEq, Serialize, Deserialize)]
struct GoldenRanking {
    topic: usize,
    lambda: f64,
    terms: Vec<String>,
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/golden")
}

fn planted_docs() -> Vec<TokenizedDoc> {
    let themes: [[&str; 8]; 3] = [
        ["tax", "budget", "deficit", "debt", "revenue", "spending", "inflation", "treasury"],
        ["school", "teacher", "pupil", "university", "curriculum", "exam", "student", "classroom"],
        ["hospital", "doctor", "nurse", "patient", "clinic", "vaccine", "surgery", "pharmacy"],
    ];
    let shared = ["minister", "government", "reform"];
    (0..30)
        .map(|d| {
            let theme = &themes[d % 3];
            let tokens = (0..24)
                .map(|i| if i % 6 == 5 { shared[(d + i) % 3] } else { theme[(d * 5 + i * i + i / 3) % 8] })
                .map(String::from)
                .collect();
            TokenizedDoc { id: format!("doc{d:02}"), tokens }
        })
        .collect()
}

fn build() -> VisData {
    let docs = planted_docs();
    let lists: Vec<Vec<String>> = docs.iter().map(|d| d.tokens.clone()).collect();
    let vocab = build_vocabulary(&lists, 1).unwrap();
    assert!(vocab.len() <= 30);
    let matrix = vectorize(&docs, &vocab);
    let config = LdaConfig::new(3).with_priors(0.1, 0.01).with_iterations(300, 100).with_seed(42);
    let model = train_lda(&matrix, &config).unwrap().with_vocabulary_hash(vocab.fingerprint());
    // Every term is exported so the front end can re-rank exactly.
    export_vis(&model, &vocab, vocab.len()).unwrap()
}

fn rankings(vis: &VisData) -> Vec<GoldenRanking> {
    let mut out = Vec::new();
    for topic in &vis.topics {
        for lambda in LAMBDAS {
            let terms = vis.rank_topic(topic.id, lambda, topic.terms.len()).unwrap().into_iter().map(|r| r.term).collect();
            out.push(GoldenRanking { topic: topic.id, lambda, terms });
        }
    }
    out
}

fn load() -> (VisData, Vec<GoldenRanking>) {
    let dir = golden_dir();
    if std::env::var_os("PARLASCOPE_UPDATE_GOLDEN").is_some() {
        let vis = build();
        std::fs::create_dir_all(&dir).unwrap();
        vis.write(&dir.join("visdata.json")).unwrap();
        let ranks = serde_json::to_vec_pretty(&rankings(&vis)).unwrap();
        std::fs::write(dir.join("visdata_ranks.json"), ranks).unwrap();
    }
    let vis = VisData::read(&dir.join("visdata.json")).unwrap();
    let ranks = serde_json::from_slice(&std::fs::read(dir.join("visdata_ranks.json")).unwrap()).unwrap();
    (vis, ranks)
}

#[test]
fn golden_rankings_reproduce() {
    let (vis, expected) = load();
    assert_eq!(expected.len(), vis.k * LAMBDAS.len());
    assert_eq!(rankings(&vis), expected);
}

#[test]
fn golden_payload_matches_fresh_export() {
    let (golden, _) = load();
    let fresh = build();
    assert_eq!(fresh.k, golden.k);
    assert_eq!(fresh.provenance, golden.provenance);
    assert_eq!(fresh.corpus, golden.corpus);
    for (a, b) in fresh.topics.iter().zip(&golden.topics) {
        assert_eq!(a.id, b.id);
        assert!((a.proportion - b.proportion).abs() < 1e-9);
        assert!((a.x - b.x).abs() < 1e-9 && (a.y - b.y).abs() < 1e-9);
        let ta: Vec<_> = a.terms.iter().map(|t| &t.term).collect();
        let tb: Vec<_> = b.terms.iter().map(|t| &t.term).collect();
        assert_eq!(ta, tb);
        for (x, y) in a.terms.iter().zip(&b.terms) {
            assert!((x.p_kw - y.p_kw).abs() < 1e-12 && (x.p_w - y.p_w).abs() < 1e-12);
        }
    }
}

#[test]
fn golden_payload_shape() {
    let (vis, _) = load();
    assert_eq!(vis.topics.len(), vis.k);
    assert_eq!(vis.default_lambda, 0.6);
    let total: f64 = vis.topics.iter().map(|t| t.proportion).sum();
    assert!((total - 1.0).abs() < 1e-9);
    for t in &vis.topics {
        let mass: f64 = t.terms.iter().map(|w| w.p_kw).sum();
        assert!((mass - 1.0).abs() < 1e-9, "topic {} exports its full distribution", t.id);
    }
    // The planted themes are recovered: each topic's top term comes from a distinct theme.
    let tops: std::collections::BTreeSet<_> =
        vis.topics.iter().map(|t| vis.rank_topic(t.id, 1.0, 1).unwrap()[0].term.clone()).collect();
    assert_eq!(tops.len(), 3);
}
