use std::io::Write;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{log_likelihood, train_lda, LdaConfig, LdaError, TopicModel};
use crate::preprocess::DocTermMatrix;
use crate::vis::topic_distances;

/// Settings shared by every K of a sweep. `alpha: None` means 50/K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTemplate {
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Share of documents held out for the log-likelihood column. Zero
    /// scores the training documents instead.
    pub holdout_fraction: f64,
}

impl Default for SweepTemplate {
    fn default() -> Self {
        let base = LdaConfig::new(1);
        SweepTemplate {
            alpha: None,
            beta: base.beta,
            iterations: base.iterations,
            burn_in: base.burn_in,
            seed: 0,
            holdout_fraction: 0.1,
        }
    }
}

impl SweepTemplate {
    pub fn config_for(&self, k: usize) -> LdaConfig {
        let mut c = LdaConfig::new(k).with_iterations(self.iterations, self.burn_in).with_seed(self.seed);
        c.beta = self.beta;
        if let Some(a) = self.alpha {
            c.alpha = a;
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub k: usize,
    pub loglik_per_token: f64,
    pub mean_topic_distance: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepDiagnostics {
    pub rows: Vec<DiagnosticsRow>,
}

impl SweepDiagnostics {
    /// CSV `K,loglik_per_token,mean_topic_distance,seconds`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["K", "loglik_per_token", "mean_topic_distance", "seconds"])?;
        for r in &self.rows {
            w.write_record([
                r.k.to_string(),
                r.loglik_per_token.to_string(),
                r.mean_topic_distance.to_string(),
                format!("{:.3}", r.seconds),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// K with the largest mean pairwise topic distance.
    pub fn most_separated(&self) -> Option<usize> {
        self.rows
            .iter()
            .max_by(|a, b| a.mean_topic_distance.total_cmp(&b.mean_topic_distance).then(b.k.cmp(&a.k)))
            .map(|r| r.k)
    }
}

pub struct SweepResult {
    pub models: Vec<TopicModel>,
    pub diagnostics: SweepDiagnostics,
}

fn mean_pairwise(model: &TopicModel) -> f64 {
    let k = model.k();
    if k < 2 {
        return 0.0;
    }
    let d = topic_distances(model);
    let mut sum = 0.0;
    for i in 0..k {
        for j in i + 1..k {
            sum += d.get(i, j);
        }
    }
    sum / (k * (k - 1) / 2) as f64
}

/// Trains one model per K in `k_min..=k_max` and records diagnostics.
pub fn sweep_topic_counts(
    matrix: &DocTermMatrix,
    k_min: usize,
    k_max: usize,
    template: &SweepTemplate,
) -> Result<SweepResult, LdaError> {
    if k_min < 2 || k_min > k_max {
        return Err(LdaError::Config(format!("invalid topic range {k_min}..={k_max} (need 2 <= k_min <= k_max)")));
    }
    if !(0.0..1.0).contains(&template.holdout_fraction) {
        return Err(LdaError::Config("holdout_fraction must lie in [0, 1)".into()));
    }

    let n = matrix.n_docs();
    let mut positions: Vec<usize> = (0..n).collect();
    positions.shuffle(&mut ChaCha8Rng::seed_from_u64(template.seed));
    let n_held = (template.holdout_fraction * n as f64).round() as usize;
    let mut held: Vec<usize> = positions[..n_held].to_vec();
    let mut kept: Vec<usize> = positions[n_held..].to_vec();
    held.sort_unstable();
    kept.sort_unstable();
    let (train, heldout) = if held.is_empty() || matrix.subset(&kept).is_empty() {
        (matrix.clone(), None)
    } else {
        (matrix.subset(&kept), Some(matrix.subset(&held)))
    };

    let mut models = Vec::new();
    let mut rows = Vec::new();
    for k in k_min..=k_max {
        let start = Instant::now();
        let model = train_lda(&train, &template.config_for(k))?;
        let seconds = start.elapsed().as_secs_f64();
        let ll = log_likelihood(&model, heldout.as_ref().unwrap_or(&train));
        rows.push(DiagnosticsRow {
            k,
            loglik_per_token: ll.per_token,
            mean_topic_distance: mean_pairwise(&model),
            seconds,
        });
        models.push(model);
    }
    Ok(SweepResult { models, diagnostics: SweepDiagnostics { rows } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::DocRow;

    fn tiny() -> DocTermMatrix {
        DocTermMatrix {
            vocab_size: 6,
            rows: (0..12)
                .map(|i| DocRow {
                    id: format!("d{i:02}"),
                    entries: if i % 2 == 0 { vec![(0, 3), (1, 2), (2, 1)] } else { vec![(3, 2), (4, 3), (5, 1)] },
                })
                .collect(),
        }
    }

    fn quick() -> SweepTemplate {
        SweepTemplate { iterations: 20, burn_in: 5, seed: 3, ..Default::default() }
    }

    #[test]
    fn single_k_single_row() {
        let r = sweep_topic_counts(&tiny(), 2, 2, &quick()).unwrap();
        assert_eq!(r.diagnostics.rows.len(), 1);
        assert_eq!(r.models.len(), 1);
    }

    #[test]
    fn one_row_per_k() {
        let r = sweep_topic_counts(&tiny(), 2, 5, &quick()).unwrap();
        let ks: Vec<_> = r.diagnostics.rows.iter().map(|r| r.k).collect();
        assert_eq!(ks, vec![2, 3, 4, 5]);
        assert!(r.diagnostics.rows.iter().all(|r| r.loglik_per_token.is_finite() && r.loglik_per_token < 0.0));
    }

    #[test]
    fn bad_range() {
        assert!(sweep_topic_counts(&tiny(), 6, 5, &quick()).is_err());
        assert!(sweep_topic_counts(&tiny(), 1, 5, &quick()).is_err());
    }

    #[test]
    fn alpha_follows_k_unless_fixed() {
        let t = SweepTemplate::default();
        assert_eq!(t.config_for(5).alpha, 10.0);
        let fixed = SweepTemplate { alpha: Some(0.1), ..t };
        assert_eq!(fixed.config_for(5).alpha, 0.1);
    }

    #[test]
    fn csv_header() {
        let r = sweep_topic_counts(&tiny(), 2, 2, &quick()).unwrap();
        let mut buf = Vec::new();
        r.diagnostics.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("K,loglik_per_token,mean_topic_distance,seconds\n2,"));
    }
}
