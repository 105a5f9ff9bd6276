//! Soft-margin SVM on precomputed kernels.

mod margin;
mod smo;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use margin::{
    decision_values, dual_objective, margin_report, noisy_margin_cross_eval, predict_accuracy,
    primal_objective, slacks, weight_norm_sq, MarginReport, DEGENERATE_NORM,
};
pub use smo::{
    solve_dual, solve_dual_with, DualSolution, SolverOptions, DEFAULT_MAX_ITER, DEFAULT_TOL,
};

/// Binary labels stored as `+1.0` / `-1.0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSet {
    labels: Vec<f64>,
}

impl LabeledSet {
    pub fn new(labels: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = labels
            .iter()
            .enumerate()
            .find(|(_, &v)| v != 1.0 && v != -1.0)
        {
            return Err(Error::Validation(format!("label {i} is {v}, expected +1 or -1")));
        }
        Ok(Self { labels })
    }

    pub fn from_signs(signs: &[i8]) -> Result<Self> {
        Self::new(signs.iter().map(|&s| s as f64).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.labels
    }

    pub fn get(&self, i: usize) -> f64 {
        self.labels[i]
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&y| y > 0.0).count()
    }

    pub fn negatives(&self) -> usize {
        self.len() - self.positives()
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        Self {
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn require_both_classes(&self) -> Result<()> {
        if self.positives() == 0 || self.negatives() == 0 {
            return Err(Error::Validation(format!(
                "training needs both classes, got {} positive and {} negative labels",
                self.positives(),
                self.negatives()
            )));
        }
        Ok(())
    }
}
