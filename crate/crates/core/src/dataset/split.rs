use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DatasetError, Instance, LabeledDataset};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { train_fraction: 0.8, seed: 0 }
    }
}

impl SplitSpec {
    pub fn with_seed(seed: u64) -> Self {
        SplitSpec { seed, ..Default::default() }
    }
}

/// Per-class train sizes: the overall train size is `round(f * n)`, spread
/// over classes by largest remainder of `f * n_c` (ties to the lower label),
/// then clamped so every class keeps at least one instance on each side.
pub(crate) fn train_sizes(class_sizes: &[usize], fraction: f64) -> Vec<usize> {
    let n: usize = class_sizes.iter().sum();
    let target = (fraction * n as f64).round() as usize;
    let exact: Vec<f64> = class_sizes.iter().map(|&c| fraction * c as f64).collect();
    let mut sizes: Vec<usize> = exact.iter().map(|&x| (x + 1e-9).floor() as usize).collect();
    let mut remaining = target.saturating_sub(sizes.iter().sum());
    let mut by_remainder: Vec<usize> = (0..class_sizes.len()).collect();
    by_remainder.sort_by(|&a, &b| {
        let ra = exact[a] - sizes[a] as f64;
        let rb = exact[b] - sizes[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &c in by_remainder.iter().cycle().take(class_sizes.len() * 2) {
        if remaining == 0 {
            break;
        }
        if sizes[c] < class_sizes[c] {
            sizes[c] += 1;
            remaining -= 1;
        }
    }
    sizes
        .iter()
        .zip(class_sizes)
        .map(|(&s, &c)| if c >= 2 { s.clamp(1, c - 1) } else { s })
        .collect()
}

/// Stratified shuffled split into train and test.
pub fn split_dataset(dataset: &LabeledDataset, spec: &SplitSpec) -> Result<(LabeledDataset, LabeledDataset), DatasetError> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(DatasetError::TrainFraction(spec.train_fraction));
    }
    if dataset.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }
    let counts = dataset.class_counts();
    let present: Vec<usize> = (0..2).filter(|&l| counts[l] > 0).collect();
    for &l in &present {
        if counts[l] < 2 {
            return Err(DatasetError::Stratification { label: l as u8, count: counts[l] });
        }
    }

    let sizes = train_sizes(&present.iter().map(|&l| counts[l]).collect::<Vec<_>>(), spec.train_fraction);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut train: Vec<Instance> = Vec::new();
    let mut test: Vec<Instance> = Vec::new();
    for (&label, &n_train) in present.iter().zip(&sizes) {
        let mut members: Vec<&Instance> = dataset.instances.iter().filter(|i| i.label as usize == label).collect();
        members.shuffle(&mut rng);
        train.extend(members[..n_train].iter().map(|&i| i.clone()));
        test.extend(members[n_train..].iter().map(|&i| i.clone()));
    }
    train.shuffle(&mut rng);
    test.shuffle(&mut rng);
    Ok((
        LabeledDataset { task: dataset.task, instances: train },
        LabeledDataset { task: dataset.task, instances: test },
    ))
}
