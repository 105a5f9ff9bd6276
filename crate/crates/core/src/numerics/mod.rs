//! Dense linear algebra and descriptive statistics.

mod complex;
mod eigen;
mod real;
mod stats;

pub use complex::{kron_all, pauli, ComplexMatrix, I, ONE, ZERO};
pub use eigen::{symmetric_eigen, SymmetricEigen};
pub use num_complex::Complex64;
pub use real::RealMatrix;
pub use stats::{
    combined_uncertainty, linear_regression, quantile_sorted, summary_stats, RegressionResult,
    Summary,
};
