//! Everything the topic explorer needs: term relevance, intertopic
//! distances, a 2-D topic map and the serialized payload.

mod project;

use std::cmp::Ordering;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lda::TopicModel;
use crate::preprocess::Vocabulary;

pub use project::project_2d;

pub const DEFAULT_LAMBDA: f64 = 0.6;
pub const DEFAULT_TOP_N: usize = 30;

#[derive(Debug, Error)]
pub enum VisError {
    #[error("relevance needs positive probabilities (p_kw = {p_kw}, p_w = {p_w})")]
    Domain { p_kw: f64, p_w: f64 },
    #[error("lambda must lie in [0, 1], got {0}")]
    Lambda(f64),
    #[error("topic {topic} out of range (model has {k} topics)")]
    TopicRange { topic: usize, k: usize },
    #[error("top_n must be at least 1")]
    TopN,
    #[error("vocabulary has {vocab} terms but the model has {model}")]
    VocabularyMismatch { vocab: usize, model: usize },
    #[error("projection needs at least 2 topics, got {0}")]
    TooFewTopics(usize),
    #[error("distance matrix is not symmetric, non-negative with zero diagonal: {0}")]
    BadDistances(String),
    #[error("{path}: {message}")]
    File { path: String, message: String },
}

/// `lambda * ln(p_kw) + (1 - lambda) * ln(p_kw / p_w)`.
pub fn relevance(p_kw: f64, p_w: f64, lambda: f64) -> Result<f64, VisError> {
    relevance_with(p_kw, p_w, lambda, f64::ln)
}

fn relevance_with(p_kw: f64, p_w: f64, lambda: f64, log: fn(f64) -> f64) -> Result<f64, VisError> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(VisError::Lambda(lambda));
    }
    if !(p_kw > 0.0 && p_w > 0.0) {
        return Err(VisError::Domain { p_kw, p_w });
    }
    Ok(lambda * log(p_kw) + (1.0 - lambda) * log(p_kw / p_w))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedTerm {
    pub term: String,
    pub index: usize,
    pub relevance: f64,
    pub p_kw: f64,
    pub p_w: f64,
}

fn by_relevance(a: &RankedTerm, b: &RankedTerm) -> Ordering {
    b.relevance
        .partial_cmp(&a.relevance)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.term.cmp(&b.term))
}

/// Ranks candidate `(term, p_kw, p_w)` triples by relevance, descending,
/// ties broken by the lexicographically smaller term.
pub fn rank_candidates<'a, I>(candidates: I, lambda: f64, top_n: usize) -> Result<Vec<RankedTerm>, VisError>
where
    I: IntoIterator<Item = (usize, &'a str, f64, f64)>,
{
    rank_candidates_with(candidates, lambda, top_n, f64::ln)
}

fn rank_candidates_with<'a, I>(
    candidates: I,
    lambda: f64,
    top_n: usize,
    log: fn(f64) -> f64,
) -> Result<Vec<RankedTerm>, VisError>
where
    I: IntoIterator<Item = (usize, &'a str, f64, f64)>,
{
    if top_n == 0 {
        return Err(VisError::TopN);
    }
    let mut ranked = candidates
        .into_iter()
        .map(|(index, term, p_kw, p_w)| {
            Ok(RankedTerm {
                term: term.to_string(),
                index,
                relevance: relevance_with(p_kw, p_w, lambda, log)?,
                p_kw,
                p_w,
            })
        })
        .collect::<Result<Vec<_>, VisError>>()?;
    ranked.sort_by(by_relevance);
    ranked.truncate(top_n);
    Ok(ranked)
}

/// Top `top_n` terms of topic `topic` by relevance at `lambda`.
pub fn rank_terms(
    model: &TopicModel,
    vocabulary: &Vocabulary,
    topic: usize,
    lambda: f64,
    top_n: usize,
) -> Result<Vec<RankedTerm>, VisError> {
    rank_terms_with(model, vocabulary, topic, lambda, top_n, f64::ln)
}

fn rank_terms_with(
    model: &TopicModel,
    vocabulary: &Vocabulary,
    topic: usize,
    lambda: f64,
    top_n: usize,
    log: fn(f64) -> f64,
) -> Result<Vec<RankedTerm>, VisError> {
    if topic >= model.k() {
        return Err(VisError::TopicRange { topic, k: model.k() });
    }
    if vocabulary.len() != model.vocab_size {
        return Err(VisError::VocabularyMismatch { vocab: vocabulary.len(), model: model.vocab_size });
    }
    let phi = model.phi_row(topic);
    rank_candidates_with(
        vocabulary
            .terms()
            .iter()
            .enumerate()
            .map(|(w, t)| (w, t.as_str(), phi[w], vocabulary.probability(w))),
        lambda,
        top_n,
        log,
    )
}

/// Jensen-Shannon divergence with base-2 logarithms, in [0, 1].
pub fn jensen_shannon(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let m = 0.5 * (a + b);
        if a > 0.0 {
            total += 0.5 * a * (a / m).log2();
        }
        if b > 0.0 {
            total += 0.5 * b * (b / m).log2();
        }
    }
    total.clamp(0.0, 1.0)
}

/// Square symmetric matrix of pairwise topic distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    k: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let k = rows.len();
        DistanceMatrix { k, values: rows.iter().flat_map(|r| r.iter().copied()).collect() }
    }

    pub fn size(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.k + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.k.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub(crate) fn validate(&self) -> Result<(), VisError> {
        if self.values.len() != self.k * self.k {
            return Err(VisError::BadDistances("not square".into()));
        }
        for i in 0..self.k {
            if self.get(i, i).abs() > 1e-12 {
                return Err(VisError::BadDistances(format!("diagonal entry {i} is {}", self.get(i, i))));
            }
            for j in 0..self.k {
                let d = self.get(i, j);
                if !(d >= 0.0 && d.is_finite()) {
                    return Err(VisError::BadDistances(format!("entry ({i},{j}) is {d}")));
                }
                if (d - self.get(j, i)).abs() > 1e-12 {
                    return Err(VisError::BadDistances(format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
            }
        }
        Ok(())
    }
}

/// Pairwise Jensen-Shannon divergence between topic-word distributions.
pub fn topic_distances(model: &TopicModel) -> DistanceMatrix {
    let k = model.k();
    let mut values = vec![0.0; k * k];
    for i in 0..k {
        for j in i + 1..k {
            let d = jensen_shannon(model.phi_row(i), model.phi_row(j));
            values[i * k + j] = d;
            values[j * k + i] = d;
        }
    }
    DistanceMatrix { k, values }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisTerm {
    pub term: String,
    pub p_kw: f64,
    pub p_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisTopic {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub proportion: f64,
    pub terms: Vec<VisTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermFrequency {
    pub term: String,
    pub frequency: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusInfo {
    pub n_tokens: u64,
    #[serde(default)]
    pub top_terms: Vec<TermFrequency>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    #[serde(default)]
    pub vocabulary_hash: Option<String>,
}

/// Payload consumed by the topic explorer. Topic ids are the model's
/// 0-based topic indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisData {
    pub k: usize,
    pub default_lambda: f64,
    pub topics: Vec<VisTopic>,
    pub corpus: CorpusInfo,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl VisData {
    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec_pretty(self).expect("vis data serializes")
    }

    pub fn write(&self, path: &Path) -> Result<(), VisError> {
        fs::write(path, self.to_json()).map_err(|e| VisError::File {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn read(path: &Path) -> Result<Self, VisError> {
        let err = |message: String| VisError::File { path: path.display().to_string(), message };
        let bytes = fs::read(path).map_err(|e| err(e.to_string()))?;
        serde_json::from_slice(&bytes).map_err(|e| err(e.to_string()))
    }

    /// Re-ranks one topic's exported terms at `lambda`.
    pub fn rank_topic(&self, topic: usize, lambda: f64, top_n: usize) -> Result<Vec<RankedTerm>, VisError> {
        let t = self.topics.iter().find(|t| t.id == topic).ok_or(VisError::TopicRange { topic, k: self.k })?;
        rank_candidates(
            t.terms.iter().enumerate().map(|(i, term)| (i, term.term.as_str(), term.p_kw, term.p_w)),
            lambda,
            top_n,
        )
    }
}

/// Builds the explorer payload: topic map coordinates, proportions and the
/// `top_n` most relevant terms per topic at the default lambda, each with
/// `p_kw` and `p_w` so relevance can be recomputed for any lambda.
pub fn export_vis(model: &TopicModel, vocabulary: &Vocabulary, top_n: usize) -> Result<VisData, VisError> {
    if top_n == 0 {
        return Err(VisError::TopN);
    }
    let k = model.k();
    let coords = if k >= 2 {
        project_2d(&topic_distances(model))?
    } else {
        vec![(0.0, 0.0)]
    };
    let proportions = model.topic_proportions();
    let topics = (0..k)
        .map(|t| {
            let terms = rank_terms(model, vocabulary, t, DEFAULT_LAMBDA, top_n)?
                .into_iter()
                .map(|r| VisTerm { term: r.term, p_kw: r.p_kw, p_w: r.p_w })
                .collect();
            Ok(VisTopic { id: t, x: coords[t].0, y: coords[t].1, proportion: proportions[t], terms })
        })
        .collect::<Result<Vec<_>, VisError>>()?;

    let top_terms = vocabulary
        .terms()
        .iter()
        .zip(vocabulary.frequencies())
        .take(top_n)
        .map(|(t, &f)| TermFrequency { term: t.clone(), frequency: f })
        .collect();

    Ok(VisData {
        k,
        default_lambda: DEFAULT_LAMBDA,
        topics,
        corpus: CorpusInfo { n_tokens: vocabulary.total(), top_terms },
        provenance: Some(Provenance {
            config_hash: model.config_hash.clone(),
            seed: model.config.seed,
            vocabulary_hash: model.vocabulary_hash.clone(),
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lda::{train_lda, LdaConfig};
    use crate::preprocess::{build_vocabulary, vectorize, TokenizedDoc};
    use proptest::prelude::*;

    #[test]
    fn lambda_one_is_log_p_kw() {
        assert!((relevance(0.1, 0.7, 1.0).unwrap() - (-2.302585)).abs() < 1e-6);
    }

    #[test]
    fn lambda_zero_unit_lift() {
        assert_eq!(relevance(0.3, 0.3, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn worked_value() {
        // 0.6 ln 0.04 + 0.4 ln 4
        let expected = 0.6 * (0.04f64).ln() + 0.4 * (4.0f64).ln();
        let r = relevance(0.04, 0.01, 0.6).unwrap();
        assert!((r - expected).abs() < 1e-12);
        assert!((r - (-1.3768)).abs() < 1e-4);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(relevance(0.0, 0.1, 0.5), Err(VisError::Domain { .. })));
        assert!(matches!(relevance(0.1, -1.0, 0.5), Err(VisError::Domain { .. })));
        assert!(matches!(relevance(0.1, 0.1, 1.5), Err(VisError::Lambda(_))));
    }

    #[test]
    fn tie_broken_lexicographically() {
        let ranked = rank_candidates([(0, "zeta", 0.2, 0.1), (1, "alpha", 0.2, 0.1), (2, "mid", 0.1, 0.1)], 0.6, 3).unwrap();
        let order: Vec<_> = ranked.iter().map(|r| r.term.as_str()).collect();
        assert_eq!(order, ["alpha", "zeta", "mid"]);
    }

    #[test]
    fn jsd_reference_values() {
        assert_eq!(jensen_shannon(&[0.3, 0.7], &[0.3, 0.7]), 0.0);
        assert!((jensen_shannon(&[1.0, 0.0], &[0.0, 1.0]) - 1.0).abs() < 1e-15);
        // M = (0.75, 0.25): 0.5*log2(1/0.75) + 0.5*(0.5*log2(0.5/0.75) + 0.5*log2(0.5/0.25))
        let by_hand = 0.5 * (1.0f64 / 0.75).log2() + 0.5 * (0.5 * (0.5f64 / 0.75).log2() + 0.5 * 2.0f64.log2());
        let jsd = jensen_shannon(&[1.0, 0.0], &[0.5, 0.5]);
        assert!((jsd - by_hand).abs() < 1e-15);
        assert!((jsd - 0.311278).abs() < 1e-6);
    }

    fn fixture() -> (TopicModel, Vocabulary) {
        let raw = [
            "tax budget deficit tax budget",
            "budget deficit debt tax",
            "school teacher child school",
            "child school pupil teacher",
            "hospital doctor nurse hospital",
            "doctor patient hospital nurse budget",
        ];
        let docs: Vec<TokenizedDoc> = raw
            .iter()
            .enumerate()
            .map(|(i, t)| TokenizedDoc { id: format!("d{i}"), tokens: t.split(' ').map(String::from).collect() })
            .collect();
        let lists: Vec<Vec<String>> = docs.iter().map(|d| d.tokens.clone()).collect();
        let vocab = build_vocabulary(&lists, 1).unwrap();
        let m = vectorize(&docs, &vocab);
        let model = train_lda(&m, &LdaConfig::new(3).with_priors(0.1, 0.01).with_iterations(200, 50).with_seed(5)).unwrap();
        (model, vocab)
    }

    #[test]
    fn rank_terms_limits_and_errors() {
        let (model, vocab) = fixture();
        assert_eq!(rank_terms(&model, &vocab, 0, 0.6, 5).unwrap().len(), 5);
        assert!(matches!(rank_terms(&model, &vocab, 3, 0.6, 5), Err(VisError::TopicRange { .. })));
        assert!(matches!(rank_terms(&model, &vocab, 0, 0.6, 0), Err(VisError::TopN)));
    }

    #[test]
    fn lambda_extremes_match_sorting_keys() {
        let (model, vocab) = fixture();
        let v = vocab.len();
        for k in 0..3 {
            let by_p: Vec<String> = rank_terms(&model, &vocab, k, 1.0, v).unwrap().into_iter().map(|r| r.term).collect();
            let mut expected: Vec<usize> = (0..v).collect();
            let phi = model.phi_row(k);
            expected.sort_by(|&a, &b| phi[b].partial_cmp(&phi[a]).unwrap().then(vocab.terms()[a].cmp(&vocab.terms()[b])));
            let expected: Vec<String> = expected.into_iter().map(|w| vocab.terms()[w].clone()).collect();
            assert_eq!(by_p, expected);

            let by_lift: Vec<String> = rank_terms(&model, &vocab, k, 0.0, v).unwrap().into_iter().map(|r| r.term).collect();
            let mut expected: Vec<usize> = (0..v).collect();
            let lift = |w: usize| phi[w] / vocab.probability(w);
            expected.sort_by(|&a, &b| lift(b).partial_cmp(&lift(a)).unwrap().then(vocab.terms()[a].cmp(&vocab.terms()[b])));
            let expected: Vec<String> = expected.into_iter().map(|w| vocab.terms()[w].clone()).collect();
            assert_eq!(by_lift, expected);
        }
    }

    #[test]
    fn ranking_base_invariant() {
        let (model, vocab) = fixture();
        for k in 0..3 {
            for lambda in [0.0, 0.3, 0.6, 1.0] {
                let ln: Vec<_> = rank_terms(&model, &vocab, k, lambda, 10).unwrap().into_iter().map(|r| r.term).collect();
                let l2: Vec<_> = rank_terms_with(&model, &vocab, k, lambda, 10, f64::log2)
                    .unwrap()
                    .into_iter()
                    .map(|r| r.term)
                    .collect();
                assert_eq!(ln, l2);
            }
        }
    }

    #[test]
    fn distances_symmetric_zero_diagonal() {
        let (model, _) = fixture();
        let d = topic_distances(&model);
        d.validate().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((0.0..=1.0).contains(&d.get(i, j)));
            }
        }
    }

    #[test]
    fn export_proportions_and_table_width() {
        let (model, vocab) = fixture();
        let vis = export_vis(&model, &vocab, 30).unwrap();
        assert_eq!(vis.k, 3);
        assert_eq!(vis.default_lambda, 0.6);
        let total: f64 = vis.topics.iter().map(|t| t.proportion).sum();
        assert!((total - 1.0).abs() < 1e-9);
        let widths: Vec<_> = vis.topics.iter().map(|t| t.terms.len()).collect();
        assert!(widths.iter().all(|&w| w == vocab.len().min(30)));
        assert!(vis.topics.iter().all(|t| t.x.is_finite() && t.y.is_finite()));
        assert_eq!(vis.corpus.n_tokens, vocab.total());
    }

    #[test]
    fn export_single_topic() {
        let (_, vocab) = fixture();
        let docs: Vec<TokenizedDoc> = vec![TokenizedDoc { id: "a".into(), tokens: vocab.terms().to_vec() }];
        let m = vectorize(&docs, &vocab);
        let model = train_lda(&m, &LdaConfig::new(1).with_iterations(3, 1)).unwrap();
        let vis = export_vis(&model, &vocab, 10).unwrap();
        assert_eq!(vis.topics.len(), 1);
        assert_eq!(vis.topics[0].proportion, 1.0);
        assert_eq!((vis.topics[0].x, vis.topics[0].y), (0.0, 0.0));
    }

    #[test]
    fn json_round_trip_reproduces_ranking() {
        let (model, vocab) = fixture();
        let vis = export_vis(&model, &vocab, 30).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vis.json");
        vis.write(&path).unwrap();
        let back = VisData::read(&path).unwrap();
        assert_eq!(back, vis);
        for t in 0..3 {
            let from_file: Vec<_> = back
                .topics[t]
                .terms
                .iter()
                .map(|x| (x.term.clone(), 0.6 * x.p_kw.ln() + 0.4 * (x.p_kw / x.p_w).ln()))
                .collect();
            let core: Vec<_> = rank_terms(&model, &vocab, t, 0.6, 30).unwrap();
            assert_eq!(from_file.len(), core.len());
            for ((term, r), c) in from_file.iter().zip(&core) {
                assert_eq!(term, &c.term);
                assert!((r - c.relevance).abs() < 1e-12);
            }
        }
    }

    fn distribution(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, n).prop_filter_map("non-zero mass", |v| {
            let s: f64 = v.iter().sum();
            (s > 1e-6).then(|| v.iter().map(|x| x / s).collect())
        })
    }

    proptest! {
        #[test]
        fn jsd_properties(p in distribution(6), q in distribution(6)) {
            let pq = jensen_shannon(&p, &q);
            prop_assert!((0.0..=1.0).contains(&pq));
            prop_assert!((pq - jensen_shannon(&q, &p)).abs() < 1e-12);
            prop_assert!(jensen_shannon(&p, &p).abs() < 1e-12);
        }

        #[test]
        fn relevance_increasing_in_p_kw(a in 1e-6f64..0.5, b in 1e-6f64..0.5, p_w in 1e-6f64..1.0, lambda in 0.01f64..=1.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-9);
            prop_assert!(relevance(lo, p_w, lambda).unwrap() < relevance(hi, p_w, lambda).unwrap());
        }
    }
}
