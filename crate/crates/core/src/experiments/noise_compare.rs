use rayon::prelude::*;
use serde::Serialize;

use super::common::{circuit, derive_seed, kernels_for_grid, load_dataset, solve, ROLE_SPLIT};
use super::output::{num, unix_now, RunOutput, Table};
use super::ExperimentConfig;
use crate::datasets::{split, SplitSpec};
use crate::error::{Error, Result};
use crate::numerics::{combined_uncertainty, summary_stats};
use crate::quantum::{equivalent_global_p, matched_global_layer_p, KernelMatrix, NoiseModel};
use crate::svm::{predict_accuracy, LabeledSet};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseComparePoint {
    pub p_local: f64,
    /// Global probability per layer with matched survival.
    pub p_global_layer: f64,
    /// Single end-of-circuit global probability, `1 - (1-p)^{NL}`.
    pub p_global_equivalent: f64,
    pub local_accuracies: Vec<f64>,
    pub global_accuracies: Vec<f64>,
    pub local_mean: f64,
    pub local_std: f64,
    pub global_mean: f64,
    pub global_std: f64,
    /// Global minus local mean accuracy.
    pub difference: f64,
    /// `sqrt(sigma_global^2 + sigma_local^2)`
    pub sigma_e: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseCompare {
    pub points: Vec<NoiseComparePoint>,
}

fn cv_accuracies(
    cfg: &ExperimentConfig,
    kernel: &KernelMatrix,
    labels: &LabeledSet,
    folds: &[(Vec<usize>, Vec<usize>)],
) -> Result<Vec<f64>> {
    folds
        .iter()
        .enumerate()
        .map(|(f, (train, test))| {
            let y = labels.select(train);
            let sol = solve(cfg, &kernel.select(train), &y, cfg.c0)
                .map_err(|e| e.context(&format!("fold {f}")))?;
            predict_accuracy(&sol, &y, &kernel.block(test, train), &labels.select(test))
        })
        .collect()
}

/// Cross-validated accuracy under local noise and under global noise with
/// the same survival probability, for every local `p` in the grid.
pub fn run_global_vs_local(cfg: &ExperimentConfig) -> Result<NoiseCompare> {
    if cfg.noise_model != NoiseModel::Local {
        return Err(Error::Config(format!(
            "noise-compare sweeps the local grid; set noise.model = local (got {})",
            cfg.noise_model
        )));
    }
    if cfg.p_grid.is_empty() {
        return Err(Error::Config("noise.p is empty".into()));
    }
    let data = load_dataset(cfg)?;
    let circ = circuit(cfg)?;
    let n = cfg.n_qubits;
    let global_grid: Vec<f64> = cfg.p_grid.iter().map(|&p| matched_global_layer_p(p, n)).collect();
    let local = kernels_for_grid(&data.features, &circ, NoiseModel::Local, &cfg.p_grid)?;
    let global = kernels_for_grid(&data.features, &circ, NoiseModel::Global, &global_grid)?;
    let plan = split(
        data.len(),
        &SplitSpec::KFold { k: cfg.cv_folds },
        derive_seed(cfg.seed, ROLE_SPLIT, 0, 0),
    )?;
    let folds: Vec<_> = (0..plan.n_folds()).map(|f| plan.fold(f)).collect();

    let points = cfg
        .p_grid
        .par_iter()
        .enumerate()
        .map(|(i, &p)| {
            let ctx = format!("p_local = {p}");
            let la = cv_accuracies(cfg, &local[i], &data.labels, &folds).map_err(|e| e.context(&ctx))?;
            let ga = cv_accuracies(cfg, &global[i], &data.labels, &folds).map_err(|e| e.context(&ctx))?;
            let ls = summary_stats(&la)?;
            let gs = summary_stats(&ga)?;
            Ok(NoiseComparePoint {
                p_local: p,
                p_global_layer: global_grid[i],
                p_global_equivalent: equivalent_global_p(p, n, cfg.n_layers),
                local_accuracies: la,
                global_accuracies: ga,
                local_mean: ls.mean,
                local_std: ls.stddev,
                global_mean: gs.mean,
                global_std: gs.stddev,
                difference: gs.mean - ls.mean,
                sigma_e: combined_uncertainty(gs.stddev, ls.stddev),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NoiseCompare { points })
}

impl NoiseCompare {
    pub fn tables(&self, cfg: &ExperimentConfig) -> Vec<Table> {
        let hash = cfg.hash();
        let seed = cfg.seed.to_string();
        let mut summary = Table::new(
            "noise_compare.csv",
            &[
                "p_local",
                "p_global_layer",
                "p_global_equivalent",
                "accuracy_local_mean",
                "accuracy_local_std",
                "accuracy_global_mean",
                "accuracy_global_std",
                "difference",
                "sigma_e",
                "config_hash",
                "seed",
            ],
        );
        let mut folds = Table::new(
            "noise_compare_folds.csv",
            &["p_local", "model", "fold", "accuracy", "config_hash", "seed"],
        );
        for p in &self.points {
            summary.push(vec![
                num(p.p_local),
                num(p.p_global_layer),
                num(p.p_global_equivalent),
                num(p.local_mean),
                num(p.local_std),
                num(p.global_mean),
                num(p.global_std),
                num(p.difference),
                num(p.sigma_e),
                hash.clone(),
                seed.clone(),
            ]);
            for (model, accs) in [("global", &p.global_accuracies), ("local", &p.local_accuracies)] {
                for (f, a) in accs.iter().enumerate() {
                    folds.push(vec![
                        num(p.p_local),
                        model.into(),
                        f.to_string(),
                        num(*a),
                        hash.clone(),
                        seed.clone(),
                    ]);
                }
            }
        }
        vec![summary, folds]
    }

    pub fn into_output(self, cfg: &ExperimentConfig, started_unix: u64) -> RunOutput {
        let summary = serde_json::json!({
            "points": self.points.iter().map(|p| serde_json::json!({
                "p_local": p.p_local,
                "p_global_equivalent": p.p_global_equivalent,
                "difference": p.difference,
                "sigma_e": p.sigma_e,
            })).collect::<Vec<_>>(),
        });
        RunOutput::new("noise-compare", cfg, started_unix, self.tables(cfg), summary)
    }
}

pub fn noise_compare_output(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let started = unix_now();
    Ok(run_global_vs_local(cfg)?.into_output(cfg, started))
}
