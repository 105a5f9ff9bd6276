use serde::{Deserialize, Serialize};

use super::{DualSolution, LabeledSet};
use crate::error::{Error, Result};
use crate::numerics::RealMatrix;
use crate::quantum::KernelMatrix;

/// Squared weight norms at or below this are treated as a zero weight
/// vector, for which the margin is undefined.
pub const DEGENERATE_NORM: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    pub weight_norm_sq: f64,
    /// `1 / ||w||^2`
    pub margin_sq: f64,
    /// `y_i f(x_i) / ||w||`; negative for misclassified samples.
    pub per_sample_margins: Vec<f64>,
    pub decision_values: Vec<f64>,
    pub slacks: Vec<f64>,
}

fn check_sizes(alphas: &[f64], labels: &LabeledSet, kernel: &KernelMatrix) -> Result<()> {
    if alphas.len() != labels.len() || kernel.size() != labels.len() {
        return Err(Error::Shape(format!(
            "{} alphas, {} labels, kernel of size {}",
            alphas.len(),
            labels.len(),
            kernel.size()
        )));
    }
    Ok(())
}

/// `sum_ij a_i a_j y_i y_j K_ij`, for any pairing of coefficients and kernel.
pub fn weight_norm_sq(alphas: &[f64], labels: &LabeledSet, kernel: &KernelMatrix) -> Result<f64> {
    check_sizes(alphas, labels, kernel)?;
    let ya: Vec<f64> = alphas.iter().zip(labels.as_slice()).map(|(a, y)| a * y).collect();
    let mut s = 0.0;
    for (i, &ui) in ya.iter().enumerate() {
        if ui == 0.0 {
            continue;
        }
        let row: f64 = ya.iter().enumerate().map(|(j, &uj)| uj * kernel.get(i, j)).sum();
        s += ui * row;
    }
    Ok(s)
}

/// `sum a - 1/2 ||w||^2`
pub fn dual_objective(alphas: &[f64], labels: &LabeledSet, kernel: &KernelMatrix) -> Result<f64> {
    let w = weight_norm_sq(alphas, labels, kernel)?;
    Ok(alphas.iter().sum::<f64>() - 0.5 * w)
}

/// `f(x_r) = sum_j a_j y_j K[r, j] + b` for each row `r` of `kernel_rows`,
/// whose columns are the training samples.
pub fn decision_values(
    alphas: &[f64],
    bias: f64,
    train_labels: &LabeledSet,
    kernel_rows: &RealMatrix,
) -> Result<Vec<f64>> {
    if kernel_rows.cols() != alphas.len() || alphas.len() != train_labels.len() {
        return Err(Error::Shape(format!(
            "kernel has {} columns for {} alphas and {} labels",
            kernel_rows.cols(),
            alphas.len(),
            train_labels.len()
        )));
    }
    let ya: Vec<f64> = alphas
        .iter()
        .zip(train_labels.as_slice())
        .map(|(a, y)| a * y)
        .collect();
    Ok((0..kernel_rows.rows())
        .map(|r| {
            kernel_rows
                .row(r)
                .iter()
                .zip(&ya)
                .map(|(k, u)| k * u)
                .sum::<f64>()
                + bias
        })
        .collect())
}

/// Hinge slacks `max(0, 1 - y_i f(x_i))` of the decision function built
/// from `alphas` and `bias` on `kernel`.
pub fn slacks(
    alphas: &[f64],
    bias: f64,
    labels: &LabeledSet,
    kernel: &KernelMatrix,
) -> Result<Vec<f64>> {
    check_sizes(alphas, labels, kernel)?;
    let f = decision_values(alphas, bias, labels, kernel.as_matrix())?;
    Ok(f.iter()
        .zip(labels.as_slice())
        .map(|(f, y)| (1.0 - y * f).max(0.0))
        .collect())
}

/// `1/2 ||w||^2 + C sum xi`
pub fn primal_objective(
    solution: &DualSolution,
    kernel: &KernelMatrix,
    labels: &LabeledSet,
) -> Result<f64> {
    let w = weight_norm_sq(&solution.alphas, labels, kernel)?;
    let xi = slacks(&solution.alphas, solution.bias, labels, kernel)?;
    Ok(0.5 * w + solution.c * xi.iter().sum::<f64>())
}

pub fn margin_report(
    solution: &DualSolution,
    kernel: &KernelMatrix,
    labels: &LabeledSet,
) -> Result<MarginReport> {
    let w = weight_norm_sq(&solution.alphas, labels, kernel)?;
    if w <= DEGENERATE_NORM {
        return Err(Error::DegenerateMargin { weight_norm_sq: w });
    }
    let f = decision_values(&solution.alphas, solution.bias, labels, kernel.as_matrix())?;
    let norm = w.sqrt();
    let yf: Vec<f64> = f.iter().zip(labels.as_slice()).map(|(f, y)| y * f).collect();
    Ok(MarginReport {
        weight_norm_sq: w,
        margin_sq: 1.0 / w,
        per_sample_margins: yf.iter().map(|v| v / norm).collect(),
        slacks: yf.iter().map(|v| (1.0 - v).max(0.0)).collect(),
        decision_values: f,
    })
}

/// `1 / ||w||^2` with the coefficients of a solution trained on a noisy
/// kernel, measured on the clean kernel.
pub fn noisy_margin_cross_eval(
    noisy_solution: &DualSolution,
    clean_kernel: &KernelMatrix,
    labels: &LabeledSet,
) -> Result<f64> {
    let w = weight_norm_sq(&noisy_solution.alphas, labels, clean_kernel)?;
    if w <= DEGENERATE_NORM {
        return Err(Error::DegenerateMargin { weight_norm_sq: w });
    }
    Ok(1.0 / w)
}

/// Fraction of test samples whose decision sign matches the label, with
/// `sign(0) = +1`.
pub fn predict_accuracy(
    solution: &DualSolution,
    train_labels: &LabeledSet,
    cross_kernel: &RealMatrix,
    test_labels: &LabeledSet,
) -> Result<f64> {
    if cross_kernel.rows() != test_labels.len() {
        return Err(Error::Shape(format!(
            "cross kernel has {} rows for {} test labels",
            cross_kernel.rows(),
            test_labels.len()
        )));
    }
    if test_labels.is_empty() {
        return Err(Error::Validation("accuracy of an empty test set".into()));
    }
    let f = decision_values(&solution.alphas, solution.bias, train_labels, cross_kernel)?;
    let hits = f
        .iter()
        .zip(test_labels.as_slice())
        .filter(|(f, y)| (if **f >= 0.0 { 1.0 } else { -1.0 }) == **y)
        .count();
    Ok(hits as f64 / test_labels.len() as f64)
}
