use rayon::prelude::*;
use serde::Serialize;

use super::common::{
    circuit, derive_seed, kernels_for_grid, load_dataset, solve, ROLE_SELECT, ROLE_SPLIT,
};
use super::output::{num, opt_num, unix_now, RunOutput, Table};
use super::ExperimentConfig;
use crate::bounds::{c_prime_max, c_prime_min, feasible_c_range, theoretical_c_prime, Feasibility};
use crate::datasets::{split, PreparedDataset, SplitPlan, SplitSpec};
use crate::error::{Error, Result};
use crate::numerics::summary_stats;
use crate::quantum::{KernelMatrix, NoiseModel};
use crate::svm::{margin_report, noisy_margin_cross_eval, predict_accuracy, LabeledSet};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvScore {
    pub c0: f64,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionRow {
    pub p: f64,
    /// Noisy margin measured on the validation split; `None` falls back to
    /// the trivial bound.
    pub gamma_sq_noisy_est: Option<f64>,
    pub c_prime_min: f64,
    pub c_prime_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionReport {
    pub c0: f64,
    pub cv: Vec<CvScore>,
    pub m_train: usize,
    pub m_validation: usize,
    pub gamma_sq_clean: f64,
    pub beta: f64,
    /// `C0 m^{1 - beta}` for the training split.
    pub c_prime_theoretical: f64,
    pub rows: Vec<SelectionRow>,
    pub feasibility: Feasibility,
}

/// Everything the bound pipeline computes once and reuses: the holdout
/// split and full-dataset kernels for the clean circuit and each `p`.
pub(crate) struct BoundData {
    pub data: PreparedDataset,
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub clean: KernelMatrix,
    pub noisy: Vec<KernelMatrix>,
}

impl BoundData {
    pub fn load(cfg: &ExperimentConfig) -> Result<Self> {
        if cfg.noise_model != NoiseModel::Local {
            return Err(Error::Config(format!(
                "the margin bounds concern local noise; set noise.model = local (got {})",
                cfg.noise_model
            )));
        }
        if cfg.p_grid.is_empty() {
            return Err(Error::Config("noise.p is empty".into()));
        }
        if !matches!(cfg.split, SplitSpec::Holdout { .. }) {
            return Err(Error::Config("the bound pipeline needs a holdout split such as 75/25".into()));
        }
        let data = load_dataset(cfg)?;
        let circ = circuit(cfg)?;
        let SplitPlan::Holdout { train, test, .. } =
            split(data.len(), &cfg.split, derive_seed(cfg.seed, ROLE_SPLIT, 0, 0))?
        else {
            unreachable!("holdout spec gives a holdout plan")
        };
        let mut kernels = kernels_for_grid(
            &data.features,
            &circ,
            NoiseModel::Local,
            &std::iter::once(0.0).chain(cfg.p_grid.iter().copied()).collect::<Vec<_>>(),
        )?;
        let clean = kernels.remove(0);
        Ok(Self {
            data,
            train,
            validation: test,
            clean,
            noisy: kernels,
        })
    }

    pub fn train_labels(&self) -> LabeledSet {
        self.data.labels.select(&self.train)
    }

    pub fn validation_labels(&self) -> LabeledSet {
        self.data.labels.select(&self.validation)
    }
}

fn choose_c0(cfg: &ExperimentConfig, bd: &BoundData) -> Result<(f64, Vec<CvScore>)> {
    if cfg.c0_grid.is_empty() {
        return Ok((cfg.c0, Vec::new()));
    }
    let k_train = bd.clean.select(&bd.train);
    let y = bd.train_labels();
    let plan = split(
        bd.train.len(),
        &SplitSpec::KFold { k: cfg.cv_folds },
        derive_seed(cfg.seed, ROLE_SELECT, 0, 0),
    )?;
    let folds: Vec<_> = (0..plan.n_folds()).map(|f| plan.fold(f)).collect();
    let scores = cfg
        .c0_grid
        .par_iter()
        .map(|&c0| {
            let accs = folds
                .iter()
                .map(|(tr, te)| {
                    let yt = y.select(tr);
                    let sol = solve(cfg, &k_train.select(tr), &yt, c0)
                        .map_err(|e| e.context(&format!("C0 = {c0}")))?;
                    predict_accuracy(&sol, &yt, &k_train.block(te, tr), &y.select(te))
                })
                .collect::<Result<Vec<_>>>()?;
            let s = summary_stats(&accs)?;
            Ok(CvScore {
                c0,
                accuracy_mean: s.mean,
                accuracy_std: s.stddev,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    // first grid entry wins ties
    let best = scores
        .iter()
        .fold(None::<&CvScore>, |b, s| match b {
            Some(b) if b.accuracy_mean >= s.accuracy_mean => Some(b),
            _ => Some(s),
        })
        .expect("non-empty grid");
    Ok((best.c0, scores))
}

pub(crate) fn feasibility_report(
    cfg: &ExperimentConfig,
    bd: &BoundData,
    c0: f64,
    cv: Vec<CvScore>,
) -> Result<SelectionReport> {
    let (n, l) = (cfg.n_qubits, cfg.n_layers);
    let y_train = bd.train_labels();
    let k_train = bd.clean.select(&bd.train);
    let clean_sol = solve(cfg, &k_train, &y_train, c0).map_err(|e| e.context("clean training kernel"))?;
    let gamma_sq_clean = margin_report(&clean_sol, &k_train, &y_train)?.margin_sq;

    let y_val = bd.validation_labels();
    let k_val_clean = bd.clean.select(&bd.validation);
    let estimates: Vec<Option<f64>> = bd
        .noisy
        .par_iter()
        .zip(cfg.p_grid.par_iter())
        .map(|(k, &p)| {
            let sol = solve(cfg, &k.select(&bd.validation), &y_val, c0)
                .map_err(|e| e.context(&format!("validation kernel at p = {p}")))?;
            match noisy_margin_cross_eval(&sol, &k_val_clean, &y_val) {
                Ok(g) => Ok(Some(g)),
                Err(Error::DegenerateMargin { weight_norm_sq }) => {
                    log::warn!("p = {p}: validation margin undefined (||w||^2 = {weight_norm_sq:e}); using the trivial bound");
                    Ok(None)
                }
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;

    let rows = cfg
        .p_grid
        .iter()
        .zip(&estimates)
        .map(|(&p, &est)| {
            Ok(SelectionRow {
                p,
                gamma_sq_noisy_est: est,
                c_prime_min: c_prime_min(gamma_sq_clean, est, p, n, l)?,
                c_prime_max: c_prime_max(gamma_sq_clean, p, n, l),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let feasibility = feasible_c_range(gamma_sq_clean, &cfg.p_grid, &estimates, n, l)?;
    Ok(SelectionReport {
        c0,
        cv,
        m_train: bd.train.len(),
        m_validation: bd.validation.len(),
        gamma_sq_clean,
        beta: cfg.beta,
        c_prime_theoretical: theoretical_c_prime(c0, bd.train.len(), cfg.beta),
        rows,
        feasibility,
    })
}

/// Picks `C0` by cross-validation over `selection.c0_grid` (or takes
/// `svm.c0`), then intersects the per-noise-level `C'` intervals.
pub fn run_dataset_selection(cfg: &ExperimentConfig) -> Result<SelectionReport> {
    let bd = BoundData::load(cfg)?;
    let (c0, cv) = choose_c0(cfg, &bd)?;
    feasibility_report(cfg, &bd, c0, cv)
}

impl SelectionReport {
    pub fn tables(&self, cfg: &ExperimentConfig) -> Vec<Table> {
        let hash = cfg.hash();
        let seed = cfg.seed.to_string();
        let (low, high) = self.feasibility.bounds();
        let status = if self.feasibility.is_rejected() { "rejected" } else { "feasible" };
        let mut rows = Table::new(
            "feasibility.csv",
            &[
                "p",
                "gamma_sq_clean",
                "gamma_sq_noisy_est",
                "c_prime_min",
                "c_prime_max",
                "c0",
                "m_train",
                "range_low",
                "range_high",
                "status",
                "config_hash",
                "seed",
            ],
        );
        for r in &self.rows {
            rows.push(vec![
                num(r.p),
                num(self.gamma_sq_clean),
                opt_num(r.gamma_sq_noisy_est),
                num(r.c_prime_min),
                num(r.c_prime_max),
                num(self.c0),
                self.m_train.to_string(),
                num(low),
                num(high),
                status.into(),
                hash.clone(),
                seed.clone(),
            ]);
        }
        let mut tables = vec![rows];
        if !self.cv.is_empty() {
            let mut cv = Table::new(
                "c0_selection.csv",
                &["c0", "accuracy_mean", "accuracy_std", "selected", "config_hash", "seed"],
            );
            for s in &self.cv {
                cv.push(vec![
                    num(s.c0),
                    num(s.accuracy_mean),
                    num(s.accuracy_std),
                    (s.c0 == self.c0).to_string(),
                    hash.clone(),
                    seed.clone(),
                ]);
            }
            tables.push(cv);
        }
        tables
    }

    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "c0": self.c0,
            "m_train": self.m_train,
            "m_validation": self.m_validation,
            "gamma_sq_clean": self.gamma_sq_clean,
            "beta": self.beta,
            "c_prime_theoretical": self.c_prime_theoretical,
            "feasibility": self.feasibility,
        })
    }

    pub fn into_output(self, cfg: &ExperimentConfig, started_unix: u64) -> RunOutput {
        let summary = self.summary();
        RunOutput::new("select", cfg, started_unix, self.tables(cfg), summary)
    }
}

pub fn selection_output(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let started = unix_now();
    Ok(run_dataset_selection(cfg)?.into_output(cfg, started))
}
