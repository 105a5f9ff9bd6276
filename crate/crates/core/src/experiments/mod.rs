//! Config-driven runners for the corruption, noise-model, feasibility and
//! bound studies. Every table row carries the config hash and seed.

mod bound_sweep;
mod common;
mod config;
mod corruption;
mod noise_compare;
mod output;
mod presets;
mod selection;

use crate::error::Result;
use crate::quantum::{kernel_matrix, KernelMatrix};

pub use bound_sweep::{
    bounds_output, pick_c_prime, run_bound_sweep_at, run_bound_validation, BoundRow, BoundSweep,
    BOUND_SLACK,
};
pub use common::{circuit, load_dataset};
pub use config::{
    parse_grid, CPrimeChoice, DatasetConfig, DatasetKind, ExperimentConfig, OUT_ENV,
};
pub use corruption::{
    corruption_output, run_corruption_study, CorruptionFold, CorruptionPoint, CorruptionStudy,
};
pub use noise_compare::{noise_compare_output, run_global_vs_local, NoiseCompare, NoiseComparePoint};
pub use output::{RunOutput, RunRecord, Table};
pub use presets::{preset, preset_names, preset_text};
pub use selection::{run_dataset_selection, selection_output, CvScore, SelectionReport, SelectionRow};

/// Kernel of the whole prepared dataset under `noise.model` at `p`.
pub fn export_kernel(cfg: &ExperimentConfig, p: f64) -> Result<KernelMatrix> {
    let data = load_dataset(cfg)?;
    let circ = circuit(cfg)?;
    kernel_matrix(&data.features, &circ, &common::noise_spec(cfg.noise_model, p, &circ)?)
}
