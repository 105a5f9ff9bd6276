use rayon::prelude::*;

use super::{DatasetKind, ExperimentConfig};
use crate::datasets::{load_csv, make_gaussian_blobs, prepare, PrepareOptions, PreparedDataset};
use crate::error::{Error, Result};
use crate::quantum::{kernel_matrix, CircuitConfig, KernelMatrix, NoiseModel, NoiseSpec};
use crate::svm::{solve_dual_with, DualSolution, LabeledSet, SolverOptions};

/// Independent stream for each role of the base seed.
pub(crate) fn derive_seed(base: u64, role: u64, a: u64, b: u64) -> u64 {
    let mut z = base ^ role.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(a.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = z.wrapping_add(b.wrapping_mul(0x94D0_49BB_1331_11EB));
    z ^ (z >> 31)
}

pub(crate) const ROLE_SPLIT: u64 = 1;
pub(crate) const ROLE_CORRUPT: u64 = 2;
pub(crate) const ROLE_SELECT: u64 = 3;

pub fn load_dataset(cfg: &ExperimentConfig) -> Result<PreparedDataset> {
    let d = &cfg.dataset;
    let (raw, subset) = match d.kind {
        DatasetKind::Gaussian => (make_gaussian_blobs(d.samples.unwrap_or(500), d.std, cfg.seed)?, None),
        _ => {
            let path = d
                .path
                .as_ref()
                .ok_or_else(|| Error::Config("dataset.path is required".into()))?;
            (load_csv(path, &d.schema()?)?, d.samples.map(|n| (n, d.subset)))
        }
    };
    let prepared = prepare(
        &raw,
        &PrepareOptions {
            n_components: cfg.n_qubits,
            label_rule: d.rule()?,
            subset,
            seed: cfg.seed,
        },
    )?;
    prepared.labels.require_both_classes()?;
    if prepared.n_features() != cfg.n_qubits {
        return Err(Error::Invariant(format!(
            "{} prepared features for {} qubits",
            prepared.n_features(),
            cfg.n_qubits
        )));
    }
    Ok(prepared)
}

pub fn circuit(cfg: &ExperimentConfig) -> Result<CircuitConfig> {
    CircuitConfig::iqp(cfg.n_qubits, cfg.n_layers)
}

pub(crate) fn noise_spec(model: NoiseModel, p: f64, c: &CircuitConfig) -> Result<NoiseSpec> {
    NoiseSpec::new(model, p, c.n_qubits, c.n_layers)
}

/// Full-dataset kernels, one per grid point.
pub(crate) fn kernels_for_grid(
    features: &[Vec<f64>],
    circuit: &CircuitConfig,
    model: NoiseModel,
    grid: &[f64],
) -> Result<Vec<KernelMatrix>> {
    grid.par_iter()
        .map(|&p| {
            kernel_matrix(features, circuit, &noise_spec(model, p, circuit)?)
                .map_err(|e| e.context(&format!("{model} kernel at p = {p}")))
        })
        .collect()
}

pub(crate) fn solve(
    cfg: &ExperimentConfig,
    kernel: &KernelMatrix,
    labels: &LabeledSet,
    c: f64,
) -> Result<DualSolution> {
    solve_dual_with(
        kernel,
        labels,
        &SolverOptions::new(c).with_tol(cfg.tol).with_max_iter(cfg.max_iter),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_differ_by_role_and_index() {
        let s: Vec<u64> = [(1, 0, 0), (2, 0, 0), (2, 1, 0), (2, 0, 1)]
            .iter()
            .map(|&(r, a, b)| derive_seed(7, r, a, b))
            .collect();
        for i in 0..s.len() {
            for j in 0..i {
                assert_ne!(s[i], s[j]);
            }
        }
        assert_eq!(derive_seed(7, 2, 1, 0), s[2]);
    }

    #[test]
    fn gaussian_dataset_matches_qubits() {
        let mut cfg = ExperimentConfig::default();
        cfg.dataset.samples = Some(40);
        let d = load_dataset(&cfg).unwrap();
        assert_eq!((d.len(), d.n_features()), (40, 2));
        cfg.n_qubits = 3;
        assert!(load_dataset(&cfg).is_err());
    }
}
