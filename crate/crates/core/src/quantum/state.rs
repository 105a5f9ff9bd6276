use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{symmetric_eigen, Complex64, ComplexMatrix};

/// Mixed state of an `n_qubits` register as a `2^N x 2^N` matrix.
///
/// Qubit 0 is the most significant tensor factor.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Wraps a matrix without checking the state invariants; use
    /// [`DensityMatrix::validate`] when the source is untrusted.
    pub fn from_matrix(n_qubits: usize, matrix: ComplexMatrix) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if matrix.rows() != dim || matrix.cols() != dim {
            return Err(Error::Shape(format!(
                "{n_qubits}-qubit state needs a {dim}x{dim} matrix, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self { n_qubits, matrix })
    }

    pub fn from_pure(amplitudes: &[Complex64]) -> Result<Self> {
        let dim = amplitudes.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::Shape(format!(
                "state vector length {dim} is not a power of two"
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!(
                "state vector has squared norm {norm}"
            )));
        }
        Ok(Self {
            n_qubits: dim.trailing_zeros() as usize,
            matrix: ComplexMatrix::outer(amplitudes),
        })
    }

    /// |0...0><0...0|
    pub fn zero_state(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(0, 0)] = Complex64::new(1.0, 0.0);
        Self { n_qubits, matrix: m }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self {
            n_qubits,
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    /// Haar-random pure state from a normalised complex Gaussian vector.
    pub fn random_pure<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Self {
        let dim = 1usize << n_qubits;
        let mut psi: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        psi.iter_mut().for_each(|a| *a /= norm);
        Self {
            n_qubits,
            matrix: ComplexMatrix::outer(&psi),
        }
    }

    /// Random full-rank mixed state `G G^dagger / Tr(G G^dagger)` with a
    /// complex Gaussian `G`.
    pub fn random_mixed<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Self {
        let dim = 1usize << n_qubits;
        let g = ComplexMatrix::from_vec(
            dim,
            dim,
            (0..dim * dim)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect(),
        )
        .expect("square by construction");
        let gg = g.matmul(&g.dagger()).expect("square by construction");
        let tr = gg.trace().expect("square").re;
        Self {
            n_qubits,
            matrix: gg.scale_real(1.0 / tr),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        // square by construction
        self.matrix.trace().map(|t| t.re).unwrap_or(f64::NAN)
    }

    pub fn purity(&self) -> f64 {
        self.matrix
            .trace_of_product(&self.matrix)
            .map(|t| t.re)
            .unwrap_or(f64::NAN)
    }

    /// Conjugation `U rho U^dagger`.
    pub fn evolve(&self, unitary: &ComplexMatrix) -> Result<Self> {
        let m = unitary.matmul(&self.matrix)?.matmul(&unitary.dagger())?;
        Self::from_matrix(self.n_qubits, m)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let e = symmetric_eigen(&self.matrix.real_embedding()?)?;
        Ok(*e.values.last().expect("non-empty spectrum"))
    }

    /// Checks Hermiticity, unit trace, positivity and the purity range.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let herm = self.matrix.hermiticity_error();
        if herm > tol {
            return Err(Error::Invariant(format!("state is not Hermitian ({herm:.3e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > tol {
            return Err(Error::Invariant(format!("state has trace {tr}")));
        }
        let min_eig = self.min_eigenvalue()?;
        if min_eig < -1e-9 {
            return Err(Error::Invariant(format!(
                "state has negative eigenvalue {min_eig:.3e}"
            )));
        }
        let purity = self.purity();
        let floor = 1.0 / self.dim() as f64;
        if purity < floor - 1e-9 || purity > 1.0 + 1e-9 {
            return Err(Error::Invariant(format!(
                "purity {purity} outside [{floor}, 1]"
            )));
        }
        Ok(())
    }
}
