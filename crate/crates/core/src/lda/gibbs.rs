use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{LdaConfig, LdaError, TopicModel, MODEL_FORMAT, MODEL_VERSION};
use crate::preprocess::{DocRow, DocTermMatrix};

/// Read-only view of the sampler after a sweep.
pub struct GibbsState<'a> {
    /// 1-based sweep number; 0 is the random initialization.
    pub sweep: usize,
    pub k: usize,
    pub vocab_size: usize,
    pub n_wk: &'a [u32],
    pub n_dk: &'a [u32],
    pub n_k: &'a [u64],
    pub assignments: &'a [Vec<u16>],
}

impl GibbsState<'_> {
    pub fn check(&self, matrix: &DocTermMatrix) -> Result<(), String> {
        check_tables(self.k, self.vocab_size, self.n_wk, self.n_dk, self.n_k, matrix, self.assignments)
    }
}

pub fn train_lda(matrix: &DocTermMatrix, config: &LdaConfig) -> Result<TopicModel, LdaError> {
    train_lda_observed(matrix, config, |_| {})
}

/// Trains a model, calling `observer` after initialization and after every sweep.
pub fn train_lda_observed<F>(matrix: &DocTermMatrix, config: &LdaConfig, mut observer: F) -> Result<TopicModel, LdaError>
where
    F: FnMut(&GibbsState<'_>),
{
    config.validate()?;
    if matrix.is_empty() {
        return Err(LdaError::EmptyMatrix);
    }
    if config.k > matrix.vocab_size {
        return Err(LdaError::TooManyTopics { k: config.k, v: matrix.vocab_size });
    }

    let mut sampler = Sampler::new(matrix, config);
    let check_each = config.check_every_sweep || cfg!(debug_assertions);

    sampler.verify(matrix, 0)?;
    observer(&sampler.state(0));

    let mut phi_sum = vec![0.0; sampler.k * sampler.v];
    let mut theta_sum = vec![0.0; sampler.docs.len() * sampler.k];
    let mut samples = 0usize;

    for sweep in 1..=config.iterations {
        sampler.sweep();
        if check_each {
            sampler.verify(matrix, sweep)?;
        }
        observer(&sampler.state(sweep));
        if config.average_samples && sweep > config.burn_in {
            sampler.accumulate(&mut phi_sum, &mut theta_sum);
            samples += 1;
        }
    }
    sampler.verify(matrix, config.iterations)?;

    let (phi, theta) = if config.average_samples && samples > 0 {
        let n = samples as f64;
        (
            phi_sum.into_iter().map(|x| x / n).collect(),
            theta_sum.into_iter().map(|x| x / n).collect(),
        )
    } else {
        (sampler.phi(), sampler.theta())
    };

    Ok(TopicModel {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        config: config.clone(),
        config_hash: config.hash(),
        vocabulary_hash: None,
        vocab_size: sampler.v,
        doc_ids: matrix.rows.iter().map(|r| r.id.clone()).collect(),
        doc_lengths: sampler.docs.iter().map(|d| d.len() as u64).collect(),
        n_wk: sampler.n_wk,
        n_dk: sampler.n_dk,
        n_k: sampler.n_k,
        assignments: sampler.z,
        phi,
        theta,
    })
}

fn expand(row: &DocRow) -> Vec<u32> {
    row.entries
        .iter()
        .flat_map(|&(w, c)| std::iter::repeat_n(w, c as usize))
        .collect()
}

pub(super) fn stream_id(seed: u64, id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(id.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

enum Streams {
    Shared(ChaCha8Rng),
    PerDocument(Vec<ChaCha8Rng>),
}

impl Streams {
    fn get(&mut self, d: usize) -> &mut ChaCha8Rng {
        match self {
            Streams::Shared(rng) => rng,
            Streams::PerDocument(rngs) => &mut rngs[d],
        }
    }
}

struct Sampler {
    k: usize,
    v: usize,
    alpha: f64,
    beta: f64,
    docs: Vec<Vec<u32>>,
    z: Vec<Vec<u16>>,
    n_wk: Vec<u32>,
    n_dk: Vec<u32>,
    n_k: Vec<u64>,
    order: Vec<usize>,
    streams: Streams,
    cumulative: Vec<f64>,
}

impl Sampler {
    fn new(matrix: &DocTermMatrix, config: &LdaConfig) -> Self {
        let k = config.k;
        let v = matrix.vocab_size;
        let docs: Vec<Vec<u32>> = matrix.rows.iter().map(expand).collect();

        let mut order: Vec<usize> = (0..docs.len()).collect();
        let mut streams = if config.per_document_streams {
            order.sort_by(|&a, &b| matrix.rows[a].id.cmp(&matrix.rows[b].id));
            Streams::PerDocument(
                matrix
                    .rows
                    .iter()
                    .map(|r| {
                        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                        rng.set_stream(stream_id(config.seed, &r.id));
                        rng
                    })
                    .collect(),
            )
        } else {
            Streams::Shared(ChaCha8Rng::seed_from_u64(config.seed))
        };

        let mut n_wk = vec![0u32; v * k];
        let mut n_dk = vec![0u32; docs.len() * k];
        let mut n_k = vec![0u64; k];
        let mut z: Vec<Vec<u16>> = docs.iter().map(|d| vec![0u16; d.len()]).collect();
        for &d in &order {
            let rng = streams.get(d);
            for (i, &w) in docs[d].iter().enumerate() {
                let t = rng.random_range(0..k);
                z[d][i] = t as u16;
                n_wk[w as usize * k + t] += 1;
                n_dk[d * k + t] += 1;
                n_k[t] += 1;
            }
        }

        Sampler {
            k,
            v,
            alpha: config.alpha,
            beta: config.beta,
            docs,
            z,
            n_wk,
            n_dk,
            n_k,
            order,
            streams,
            cumulative: vec![0.0; k],
        }
    }

    fn sweep(&mut self) {
        let k = self.k;
        let vbeta = self.v as f64 * self.beta;
        for oi in 0..self.order.len() {
            let d = self.order[oi];
            let rng = self.streams.get(d);
            let dk = &mut self.n_dk[d * k..(d + 1) * k];
            for (i, &w) in self.docs[d].iter().enumerate() {
                let w = w as usize;
                let wk = &mut self.n_wk[w * k..(w + 1) * k];
                let old = self.z[d][i] as usize;
                wk[old] -= 1;
                dk[old] -= 1;
                self.n_k[old] -= 1;

                let mut total = 0.0;
                for t in 0..k {
                    total += (dk[t] as f64 + self.alpha) * (wk[t] as f64 + self.beta) / (self.n_k[t] as f64 + vbeta);
                    self.cumulative[t] = total;
                }
                let u = rng.random::<f64>() * total;
                let new = self.cumulative.iter().position(|&c| u < c).unwrap_or(k - 1);

                wk[new] += 1;
                dk[new] += 1;
                self.n_k[new] += 1;
                self.z[d][i] = new as u16;
            }
        }
    }

    fn state(&self, sweep: usize) -> GibbsState<'_> {
        GibbsState {
            sweep,
            k: self.k,
            vocab_size: self.v,
            n_wk: &self.n_wk,
            n_dk: &self.n_dk,
            n_k: &self.n_k,
            assignments: &self.z,
        }
    }

    fn verify(&self, matrix: &DocTermMatrix, sweep: usize) -> Result<(), LdaError> {
        self.state(sweep)
            .check(matrix)
            .map_err(|detail| LdaError::Invariant { sweep, detail })
    }

    fn phi(&self) -> Vec<f64> {
        let (k, v) = (self.k, self.v);
        let vbeta = v as f64 * self.beta;
        let mut phi = vec![0.0; k * v];
        for t in 0..k {
            let denom = self.n_k[t] as f64 + vbeta;
            for w in 0..v {
                phi[t * v + w] = (self.n_wk[w * k + t] as f64 + self.beta) / denom;
            }
        }
        phi
    }

    fn theta(&self) -> Vec<f64> {
        let k = self.k;
        let kalpha = k as f64 * self.alpha;
        let mut theta = vec![0.0; self.docs.len() * k];
        for (d, doc) in self.docs.iter().enumerate() {
            let denom = doc.len() as f64 + kalpha;
            for t in 0..k {
                theta[d * k + t] = (self.n_dk[d * k + t] as f64 + self.alpha) / denom;
            }
        }
        theta
    }

    fn accumulate(&self, phi_sum: &mut [f64], theta_sum: &mut [f64]) {
        for (s, x) in phi_sum.iter_mut().zip(self.phi()) {
            *s += x;
        }
        for (s, x) in theta_sum.iter_mut().zip(self.theta()) {
            *s += x;
        }
    }
}

/// Verifies the count tables against the matrix and the assignments:
/// per-term topic counts sum to the term's corpus frequency, per-topic term
/// counts sum to the topic total, per-document topic counts sum to the
/// document length, and every table equals a recount of the assignments.
pub(crate) fn check_tables(
    k: usize,
    v: usize,
    n_wk: &[u32],
    n_dk: &[u32],
    n_k: &[u64],
    matrix: &DocTermMatrix,
    assignments: &[Vec<u16>],
) -> Result<(), String> {
    if n_wk.len() != v * k || n_k.len() != k || n_dk.len() != matrix.rows.len() * k {
        return Err("table dimensions do not match K, V and D".into());
    }
    let term_totals = matrix.term_totals();
    for (w, &freq) in term_totals.iter().enumerate() {
        let s: u64 = n_wk[w * k..(w + 1) * k].iter().map(|&c| c as u64).sum();
        if s != freq {
            return Err(format!("term {w}: sum over topics {s} != corpus frequency {freq}"));
        }
    }
    for t in 0..k {
        let s: u64 = (0..v).map(|w| n_wk[w * k + t] as u64).sum();
        if s != n_k[t] {
            return Err(format!("topic {t}: sum over terms {s} != topic total {}", n_k[t]));
        }
    }
    for (d, row) in matrix.rows.iter().enumerate() {
        let s: u64 = n_dk[d * k..(d + 1) * k].iter().map(|&c| c as u64).sum();
        if s != row.len() {
            return Err(format!("document {d}: sum over topics {s} != length {}", row.len()));
        }
    }

    let mut recount_wk = vec![0u32; v * k];
    let mut recount_dk = vec![0u32; matrix.rows.len() * k];
    for (d, (row, z)) in matrix.rows.iter().zip(assignments).enumerate() {
        let tokens = expand(row);
        if tokens.len() != z.len() {
            return Err(format!("document {d}: {} assignments for {} tokens", z.len(), tokens.len()));
        }
        for (&w, &t) in tokens.iter().zip(z) {
            let t = t as usize;
            if t >= k {
                return Err(format!("document {d}: topic {t} out of range"));
            }
            recount_wk[w as usize * k + t] += 1;
            recount_dk[d * k + t] += 1;
        }
    }
    if recount_wk != n_wk {
        return Err("term-topic table differs from a recount of assignments".into());
    }
    if recount_dk != n_dk {
        return Err("document-topic table differs from a recount of assignments".into());
    }
    Ok(())
}

/// Estimates theta for an unseen document with phi held fixed.
pub(super) fn fold_in(model: &TopicModel, row: &DocRow, iterations: usize) -> Vec<f64> {
    let k = model.k();
    let v = model.vocab_size;
    let alpha = model.config.alpha;
    let tokens: Vec<usize> = expand(row).into_iter().map(|w| w as usize).filter(|&w| w < v).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(model.config.seed);
    rng.set_stream(stream_id(model.config.seed, &row.id));
    let mut counts = vec![0u32; k];
    let mut z: Vec<usize> = tokens
        .iter()
        .map(|_| {
            let t = rng.random_range(0..k);
            counts[t] += 1;
            t
        })
        .collect();
    let mut cumulative = vec![0.0; k];
    for _ in 0..iterations {
        for (i, &w) in tokens.iter().enumerate() {
            counts[z[i]] -= 1;
            let mut total = 0.0;
            for t in 0..k {
                total += (counts[t] as f64 + alpha) * model.phi[t * v + w];
                cumulative[t] = total;
            }
            let u = rng.random::<f64>() * total;
            let new = cumulative.iter().position(|&c| u < c).unwrap_or(k - 1);
            counts[new] += 1;
            z[i] = new;
        }
    }
    let denom = tokens.len() as f64 + k as f64 * alpha;
    counts.iter().map(|&c| (c as f64 + alpha) / denom).collect()
}
