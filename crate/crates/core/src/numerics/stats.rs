use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    /// `None` when the response has zero variance.
    pub pearson_r: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub mean: f64,
    /// Sample standard deviation (divisor n - 1); zero for a single value.
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Ordinary least squares fit of `ys` on `xs` with the Pearson coefficient.
pub fn linear_regression(xs: &[f64], ys: &[f64]) -> Result<RegressionResult> {
    if xs.len() != ys.len() {
        return Err(Error::Shape(format!(
            "regression on {} xs and {} ys",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::Validation("regression needs at least two points".into()));
    }
    let mx = mean(xs);
    let my = mean(ys);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 {
        return Err(Error::Validation(
            "xs have zero variance; slope is undefined".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let pearson_r = (syy > 0.0).then(|| (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0));
    Ok(RegressionResult {
        slope,
        intercept,
        pearson_r,
    })
}

/// Quantile of sorted data by linear interpolation between order statistics
/// at position `q * (n - 1)`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn summary_stats(values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::Validation("summary of an empty sequence".into()));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Validation("summary input contains NaN".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let m = mean(values);
    let stddev = if n > 1 {
        (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(Summary {
        median,
        q1: quantile_sorted(&sorted, 0.25),
        q3: quantile_sorted(&sorted, 0.75),
        mean: m,
        stddev,
        min: sorted[0],
        max: sorted[n - 1],
        count: n,
    })
}

/// Uncertainty of a difference `A - B` of independent quantities.
pub fn combined_uncertainty(sigma_a: f64, sigma_b: f64) -> f64 {
    sigma_a.hypot(sigma_b)
}
