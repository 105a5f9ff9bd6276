use rayon::prelude::*;
use serde::Serialize;

use super::common::{circuit, derive_seed, load_dataset, solve, ROLE_CORRUPT, ROLE_SPLIT};
use super::output::{num, opt_num, unix_now, RunOutput, Table};
use super::ExperimentConfig;
use crate::datasets::{corrupt_labels, split, SplitSpec};
use crate::error::{Error, Result};
use crate::numerics::{linear_regression, summary_stats, RegressionResult, Summary};
use crate::quantum::{kernel_matrix, NoiseModel, NoiseSpec};
use crate::svm::{decision_values, weight_norm_sq, DEGENERATE_NORM};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorruptionFold {
    pub fraction: f64,
    pub fold: usize,
    pub flipped: usize,
    pub accuracy: f64,
    /// Training margins `y_i f(x_i) / ||w||` against the uncorrupted labels.
    pub margins: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorruptionPoint {
    pub fraction: f64,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    /// Quartiles of the training margins pooled over folds.
    pub pooled: Summary,
    /// Spread of the per-fold medians.
    pub median_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorruptionStudy {
    pub folds: Vec<CorruptionFold>,
    pub points: Vec<CorruptionPoint>,
    /// Accuracy regressed on median margin across fractions.
    pub regression: RegressionResult,
}

/// Cross-validated label-corruption sweep on a noiseless kernel. Only the
/// training labels of each fold are corrupted.
pub fn run_corruption_study(cfg: &ExperimentConfig) -> Result<CorruptionStudy> {
    if cfg.noise_model != NoiseModel::None && cfg.p_grid.iter().any(|&p| p != 0.0) {
        log::warn!("corruption study ignores the noise grid and uses the ideal circuit");
    }
    if cfg.fractions.is_empty() {
        return Err(Error::Config("corruption.fractions is empty".into()));
    }
    let data = load_dataset(cfg)?;
    let circ = circuit(cfg)?;
    let kernel = kernel_matrix(&data.features, &circ, &NoiseSpec::none(&circ))?;
    let plan = split(
        data.len(),
        &SplitSpec::KFold { k: cfg.cv_folds },
        derive_seed(cfg.seed, ROLE_SPLIT, 0, 0),
    )?;

    let jobs: Vec<(usize, usize)> = (0..cfg.fractions.len())
        .flat_map(|fi| (0..plan.n_folds()).map(move |f| (fi, f)))
        .collect();
    let results: Vec<(CorruptionFold, Vec<f64>)> = jobs
        .par_iter()
        .map(|&(fi, f)| {
            let fraction = cfg.fractions[fi];
            let ctx = format!("fraction {fraction}, fold {f}");
            let (train, test) = plan.fold(f);
            let y_true = data.labels.select(&train);
            let corrupted = corrupt_labels(&y_true, fraction, derive_seed(cfg.seed, ROLE_CORRUPT, fi as u64, f as u64))?;
            let y_test = data.labels.select(&test);
            let k_train = kernel.select(&train);
            let sol = solve(cfg, &k_train, &corrupted.labels, cfg.c0).map_err(|e| e.context(&ctx))?;
            let accuracy = crate::svm::predict_accuracy(&sol, &corrupted.labels, &kernel.block(&test, &train), &y_test)?;
            let w = weight_norm_sq(&sol.alphas, &corrupted.labels, &k_train)?;
            if w <= DEGENERATE_NORM {
                return Err(Error::DegenerateMargin { weight_norm_sq: w }.context(&ctx));
            }
            let fvals = decision_values(&sol.alphas, sol.bias, &corrupted.labels, k_train.as_matrix())?;
            let margins: Vec<f64> = fvals
                .iter()
                .zip(y_true.as_slice())
                .map(|(fx, y)| y * fx / w.sqrt())
                .collect();
            Ok((
                CorruptionFold {
                    fraction,
                    fold: f,
                    flipped: corrupted.flipped.len(),
                    accuracy,
                    margins: summary_stats(&margins)?,
                },
                margins,
            ))
        })
        .collect::<Result<_>>()?;

    let mut points = Vec::with_capacity(cfg.fractions.len());
    for (fi, &fraction) in cfg.fractions.iter().enumerate() {
        let k = plan.n_folds();
        let here = &results[fi * k..(fi + 1) * k];
        let acc = summary_stats(&here.iter().map(|(r, _)| r.accuracy).collect::<Vec<_>>())?;
        let pooled: Vec<f64> = here.iter().flat_map(|(_, m)| m.iter().copied()).collect();
        let medians: Vec<f64> = here.iter().map(|(r, _)| r.margins.median).collect();
        points.push(CorruptionPoint {
            fraction,
            accuracy_mean: acc.mean,
            accuracy_std: acc.stddev,
            pooled: summary_stats(&pooled)?,
            median_std: summary_stats(&medians)?.stddev,
        });
    }
    let regression = linear_regression(
        &points.iter().map(|p| p.pooled.median).collect::<Vec<_>>(),
        &points.iter().map(|p| p.accuracy_mean).collect::<Vec<_>>(),
    )?;
    Ok(CorruptionStudy {
        folds: results.into_iter().map(|(r, _)| r).collect(),
        points,
        regression,
    })
}

impl CorruptionStudy {
    pub fn tables(&self, cfg: &ExperimentConfig) -> Vec<Table> {
        let hash = cfg.hash();
        let seed = cfg.seed.to_string();
        let tail = |row: &mut Vec<String>| {
            row.push(hash.clone());
            row.push(seed.clone());
        };

        let mut margins = Table::new(
            "corruption_margins.csv",
            &["fraction", "fold", "count", "min", "q1", "median", "q3", "max", "config_hash", "seed"],
        );
        let summary_row = |fraction: f64, fold: String, s: &Summary| {
            vec![
                num(fraction),
                fold,
                s.count.to_string(),
                num(s.min),
                num(s.q1),
                num(s.median),
                num(s.q3),
                num(s.max),
            ]
        };
        for p in &self.points {
            for f in self.folds.iter().filter(|f| f.fraction == p.fraction) {
                let mut row = summary_row(p.fraction, f.fold.to_string(), &f.margins);
                tail(&mut row);
                margins.push(row);
            }
            let mut row = summary_row(p.fraction, "all".into(), &p.pooled);
            tail(&mut row);
            margins.push(row);
        }

        let mut accuracy = Table::new(
            "corruption_accuracy.csv",
            &[
                "fraction",
                "accuracy_mean",
                "accuracy_std",
                "median_margin",
                "median_margin_std",
                "config_hash",
                "seed",
            ],
        );
        for p in &self.points {
            let mut row = vec![
                num(p.fraction),
                num(p.accuracy_mean),
                num(p.accuracy_std),
                num(p.pooled.median),
                num(p.median_std),
            ];
            tail(&mut row);
            accuracy.push(row);
        }

        let mut regression = Table::new(
            "corruption_regression.csv",
            &["n_points", "slope", "intercept", "pearson_r", "config_hash", "seed"],
        );
        let mut row = vec![
            self.points.len().to_string(),
            num(self.regression.slope),
            num(self.regression.intercept),
            opt_num(self.regression.pearson_r),
        ];
        tail(&mut row);
        regression.push(row);
        vec![margins, accuracy, regression]
    }

    pub fn into_output(self, cfg: &ExperimentConfig, started_unix: u64) -> RunOutput {
        let summary = serde_json::json!({
            "pearson_r": self.regression.pearson_r,
            "slope": self.regression.slope,
            "intercept": self.regression.intercept,
            "points": self.points.iter().map(|p| serde_json::json!({
                "fraction": p.fraction,
                "accuracy_mean": p.accuracy_mean,
                "accuracy_std": p.accuracy_std,
                "median_margin": p.pooled.median,
            })).collect::<Vec<_>>(),
        });
        RunOutput::new("corruption", cfg, started_unix, self.tables(cfg), summary)
    }
}

/// Runs the study and packages its tables.
pub fn corruption_output(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let started = unix_now();
    Ok(run_corruption_study(cfg)?.into_output(cfg, started))
}
