//! Quantum-kernel support vector machines under depolarising noise.
//!
//! The crate simulates an IQP feature map as density matrices, builds clean
//! and noisy kernel matrices, trains soft-margin SVMs on them and evaluates
//! closed-form bounds on how far noise can shrink the margin.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod bounds;
pub mod datasets;
pub mod experiments;
pub mod numerics;
pub mod quantum;
pub mod svm;

pub use bounds::{BoundParams, BoundReport, Feasibility};
pub use error::{Error, Result};
pub use experiments::{ExperimentConfig, RunRecord};
pub use numerics::{ComplexMatrix, RealMatrix, RegressionResult};
pub use quantum::{CircuitConfig, DensityMatrix, KernelMatrix, NoiseModel, NoiseSpec};
pub use svm::{DualSolution, LabeledSet};
