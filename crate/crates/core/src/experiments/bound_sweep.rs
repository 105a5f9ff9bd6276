use rayon::prelude::*;
use serde::Serialize;

use super::common::solve;
use super::output::{num, opt_num, unix_now, RunOutput, Table};
use super::selection::{feasibility_report, BoundData, SelectionReport};
use super::{CPrimeChoice, ExperimentConfig};
use crate::bounds::{bound_report, BoundParams, BoundReport, Feasibility};
use crate::error::{Error, Result};
use crate::svm::{noisy_margin_cross_eval, DualSolution};

/// Slack allowed when checking the bounds against measured margins.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub p: f64,
    pub gamma_sq_clean: f64,
    /// Noisy-trained coefficients measured on the clean training kernel.
    pub gamma_sq_noisy: f64,
    pub gamma_sq_noisy_est: Option<f64>,
    pub report: BoundReport,
    pub upper_violated: bool,
    pub lower_violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSweep {
    pub selection: SelectionReport,
    pub c_prime: f64,
    pub rows: Vec<BoundRow>,
}

/// Resolves the configured `C'` against the feasible range; anything outside
/// it is refused.
pub fn pick_c_prime(choice: CPrimeChoice, feasibility: &Feasibility) -> Result<f64> {
    let (low, high) = feasibility.bounds();
    if feasibility.is_rejected() {
        return Err(Error::Config(format!(
            "dataset rejected: no C' satisfies every noise level (need C' >= {low} and C' < {high})"
        )));
    }
    let c = match choice {
        CPrimeChoice::Low => low,
        CPrimeChoice::Mid => 0.5 * (low + high),
        CPrimeChoice::Value(v) => v,
    };
    if !feasibility.contains(c) {
        return Err(Error::Config(format!(
            "C' = {c} is outside the feasible range [{low}, {high})"
        )));
    }
    Ok(c)
}

/// Empirical noisy margin against the upper and lower bounds for every `p`,
/// trained with `svm.c0` on the training split.
pub fn run_bound_validation(cfg: &ExperimentConfig) -> Result<BoundSweep> {
    let bd = BoundData::load(cfg)?;
    let selection = feasibility_report(cfg, &bd, cfg.c0, Vec::new())?;
    let c_prime = pick_c_prime(cfg.c_prime, &selection.feasibility)?;
    sweep(cfg, &bd, selection, c_prime)
}

/// The same sweep at an explicit `C'`, without checking it against the
/// feasible range. Rows outside the range carry no guarantee.
pub fn run_bound_sweep_at(cfg: &ExperimentConfig, c_prime: f64) -> Result<BoundSweep> {
    let bd = BoundData::load(cfg)?;
    let selection = feasibility_report(cfg, &bd, cfg.c0, Vec::new())?;
    sweep(cfg, &bd, selection, c_prime)
}

fn sweep(
    cfg: &ExperimentConfig,
    bd: &BoundData,
    selection: SelectionReport,
    c_prime: f64,
) -> Result<BoundSweep> {
    let m = bd.train.len();
    let y = bd.train_labels();
    let k_clean = bd.clean.select(&bd.train);

    let rows = bd
        .noisy
        .par_iter()
        .zip(selection.rows.par_iter())
        .map(|(k_full, srow)| {
            let p = srow.p;
            let sol: DualSolution = solve(cfg, &k_full.select(&bd.train), &y, cfg.c0)
                .map_err(|e| e.context(&format!("training kernel at p = {p}")))?;
            let gamma_sq_noisy = noisy_margin_cross_eval(&sol, &k_clean, &y)
                .map_err(|e| e.context(&format!("p = {p}")))?;
            let report = bound_report(&BoundParams {
                p,
                n_qubits: cfg.n_qubits,
                n_layers: cfg.n_layers,
                m,
                c: c_prime / m as f64,
                gamma_sq_clean: selection.gamma_sq_clean,
                gamma_sq_noisy_est: srow.gamma_sq_noisy_est,
            })?;
            let upper_violated = report.upper.is_some_and(|u| gamma_sq_noisy > u + BOUND_SLACK);
            let lower_violated = report.lower.is_some_and(|l| l > gamma_sq_noisy + BOUND_SLACK);
            if lower_violated {
                log::info!(
                    "p = {p}: lower bound {:?} above noisy margin {gamma_sq_noisy} ({}, C' = {c_prime}, gamma^2 = {})",
                    report.lower,
                    report.lower_case,
                    selection.gamma_sq_clean
                );
            }
            Ok(BoundRow {
                p,
                gamma_sq_clean: selection.gamma_sq_clean,
                gamma_sq_noisy,
                gamma_sq_noisy_est: srow.gamma_sq_noisy_est,
                report,
                upper_violated,
                lower_violated,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundSweep {
        selection,
        c_prime,
        rows,
    })
}

impl BoundSweep {
    pub fn tables(&self, cfg: &ExperimentConfig) -> Vec<Table> {
        let hash = cfg.hash();
        let seed = cfg.seed.to_string();
        let mut t = Table::new(
            "bounds.csv",
            &[
                "p",
                "decay_factor",
                "gamma_sq_clean",
                "gamma_sq_noisy",
                "upper",
                "lower",
                "lower_case",
                "feasible",
                "gamma_sq_noisy_est",
                "c_prime",
                "c_prime_min",
                "c_prime_max",
                "upper_violated",
                "lower_violated",
                "config_hash",
                "seed",
            ],
        );
        for r in &self.rows {
            t.push(vec![
                num(r.p),
                num(r.report.decay_factor),
                num(r.gamma_sq_clean),
                num(r.gamma_sq_noisy),
                opt_num(r.report.upper),
                opt_num(r.report.lower),
                r.report.lower_case.as_str().into(),
                r.report.feasible.to_string(),
                opt_num(r.gamma_sq_noisy_est),
                num(self.c_prime),
                num(r.report.c_prime_min),
                num(r.report.c_prime_max),
                r.upper_violated.to_string(),
                r.lower_violated.to_string(),
                hash.clone(),
                seed.clone(),
            ]);
        }
        let mut tables = vec![t];
        tables.extend(self.selection.tables(cfg));
        tables
    }

    pub fn into_output(self, cfg: &ExperimentConfig, started_unix: u64) -> RunOutput {
        let mut summary = self.selection.summary();
        summary["c_prime"] = serde_json::json!(self.c_prime);
        summary["upper_violations"] =
            serde_json::json!(self.rows.iter().filter(|r| r.upper_violated).count());
        summary["lower_violations"] =
            serde_json::json!(self.rows.iter().filter(|r| r.lower_violated).count());
        RunOutput::new("bounds", cfg, started_unix, self.tables(cfg), summary)
    }
}

pub fn bounds_output(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let started = unix_now();
    Ok(run_bound_validation(cfg)?.into_output(cfg, started))
}
