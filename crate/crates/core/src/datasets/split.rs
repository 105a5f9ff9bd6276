use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::svm::LabeledSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SplitSpec {
    /// Fraction of samples used for training.
    Holdout { train_ratio: f64 },
    KFold { k: usize },
}

impl std::str::FromStr for SplitSpec {
    type Err = Error;
    /// Accepts `75/25`, `0.75` or `kfold:5`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("cannot parse split '{s}'"));
        if let Some(k) = s.strip_prefix("kfold:") {
            return Ok(SplitSpec::KFold { k: k.trim().parse().map_err(|_| bad())? });
        }
        if let Some((a, b)) = s.split_once('/') {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            if !(a > 0.0 && b > 0.0) {
                return Err(bad());
            }
            return Ok(SplitSpec::Holdout { train_ratio: a / (a + b) });
        }
        Ok(SplitSpec::Holdout { train_ratio: s.parse().map_err(|_| bad())? })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SplitPlan {
    Holdout { train: Vec<usize>, test: Vec<usize>, seed: u64 },
    KFold { folds: Vec<Vec<usize>>, seed: u64 },
}

impl SplitPlan {
    pub fn n_folds(&self) -> usize {
        match self {
            SplitPlan::Holdout { .. } => 1,
            SplitPlan::KFold { folds, .. } => folds.len(),
        }
    }

    /// Sorted `(train, test)` indices of fold `f`.
    pub fn fold(&self, f: usize) -> (Vec<usize>, Vec<usize>) {
        match self {
            SplitPlan::Holdout { train, test, .. } => (train.clone(), test.clone()),
            SplitPlan::KFold { folds, .. } => {
                let mut test = folds[f].clone();
                test.sort_unstable();
                let mut train: Vec<usize> = folds
                    .iter()
                    .enumerate()
                    .filter(|(g, _)| *g != f)
                    .flat_map(|(_, v)| v.iter().copied())
                    .collect();
                train.sort_unstable();
                (train, test)
            }
        }
    }
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Seeded shuffle followed by a holdout cut or `k` near-equal folds.
pub fn split(m: usize, spec: &SplitSpec, seed: u64) -> Result<SplitPlan> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(&mut rng);
    match *spec {
        SplitSpec::Holdout { train_ratio } => {
            if !(train_ratio > 0.0 && train_ratio < 1.0) {
                return Err(Error::Validation(format!(
                    "holdout ratio {train_ratio} outside (0, 1)"
                )));
            }
            let n_train = round_half_up(train_ratio * m as f64);
            if n_train == 0 || n_train >= m {
                return Err(Error::Validation(format!(
                    "ratio {train_ratio} leaves an empty side for m = {m}"
                )));
            }
            let mut train = perm[..n_train].to_vec();
            let mut test = perm[n_train..].to_vec();
            train.sort_unstable();
            test.sort_unstable();
            Ok(SplitPlan::Holdout { train, test, seed })
        }
        SplitSpec::KFold { k } => {
            if k < 2 || k > m {
                return Err(Error::Validation(format!("{k} folds for {m} samples")));
            }
            let base = m / k;
            let extra = m % k;
            let mut folds = Vec::with_capacity(k);
            let mut start = 0;
            for f in 0..k {
                let len = base + usize::from(f < extra);
                let mut fold = perm[start..start + len].to_vec();
                fold.sort_unstable();
                folds.push(fold);
                start += len;
            }
            Ok(SplitPlan::KFold { folds, seed })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corruption {
    pub labels: LabeledSet,
    /// Sorted indices whose sign was flipped.
    pub flipped: Vec<usize>,
}

/// Flips the signs of `round(fraction * m)` labels chosen uniformly without
/// replacement.
pub fn corrupt_labels(labels: &LabeledSet, fraction: f64, seed: u64) -> Result<Corruption> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::Validation(format!("corruption fraction {fraction} outside [0, 1]")));
    }
    let m = labels.len();
    let count = round_half_up(fraction * m as f64).min(m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flipped = index::sample(&mut rng, m, count).into_vec();
    flipped.sort_unstable();
    Ok(Corruption {
        labels: flip_at(labels, &flipped)?,
        flipped,
    })
}

pub fn flip_at(labels: &LabeledSet, idx: &[usize]) -> Result<LabeledSet> {
    let mut y = labels.as_slice().to_vec();
    for &i in idx {
        y[i] = -y[i];
    }
    LabeledSet::new(y)
}
