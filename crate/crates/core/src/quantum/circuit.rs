//! IQP feature encoding.
//!
//! One layer applies H to every qubit, R_z(x_k) to qubit k, then a ZZ
//! entangler with angle x_k * x_{k+1} on each nearest-neighbour pair. The
//! whole layer is repeated `n_layers` times starting from |0...0>.

use serde::{Deserialize, Serialize};

use super::DensityMatrix;
use crate::error::{Error, Result};
use crate::numerics::{Complex64, ComplexMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Encoding {
    Iqp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitConfig {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub encoding: Encoding,
}

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 8;

impl CircuitConfig {
    pub fn iqp(n_qubits: usize, n_layers: usize) -> Result<Self> {
        if n_qubits == 0 || n_layers == 0 {
            return Err(Error::Validation(format!(
                "circuit needs N >= 1 and L >= 1, got N={n_qubits}, L={n_layers}"
            )));
        }
        if n_qubits > MAX_QUBITS {
            return Err(Error::UnsupportedSize(format!(
                "{n_qubits} qubits exceeds the dense simulator limit of {MAX_QUBITS}"
            )));
        }
        Ok(Self {
            n_qubits,
            n_layers,
            encoding: Encoding::Iqp,
        })
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub(crate) fn check_features(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_qubits {
            return Err(Error::Validation(format!(
                "feature vector has {} entries but the circuit has {} qubits",
                x.len(),
                self.n_qubits
            )));
        }
        if let Some(v) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("non-finite feature {v}")));
        }
        Ok(())
    }
}

/// Z eigenvalue (+1 for bit 0) of qubit `k` in basis state `b`.
fn z_sign(b: usize, k: usize, n: usize) -> f64 {
    if (b >> (n - 1 - k)) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn hadamard_all(n: usize) -> ComplexMatrix {
    let dim = 1usize << n;
    let s = (dim as f64).sqrt().recip();
    let mut h = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            // <i|H^{(x)n}|j> = (-1)^{popcount(i & j)} / sqrt(2^n)
            let sign = if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            h[(i, j)] = Complex64::new(sign * s, 0.0);
        }
    }
    h
}

/// Diagonal phase from R_z(x_k) = exp(-i x_k Z/2) and
/// ZZ(x_k x_{k+1}) = exp(-i x_k x_{k+1} Z Z / 2).
fn phase_diagonal(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    (0..1usize << n)
        .map(|b| {
            let mut angle = 0.0;
            for (k, &xk) in x.iter().enumerate() {
                angle += xk * z_sign(b, k, n);
            }
            for k in 0..n.saturating_sub(1) {
                angle += x[k] * x[k + 1] * z_sign(b, k, n) * z_sign(b, k + 1, n);
            }
            Complex64::from_polar(1.0, -0.5 * angle)
        })
        .collect()
}

/// Unitary of a single IQP layer for features `x`.
pub fn iqp_layer_unitary(x: &[f64]) -> ComplexMatrix {
    let n = x.len();
    let phases = phase_diagonal(x);
    let mut u = hadamard_all(n);
    for (i, p) in phases.iter().enumerate() {
        for j in 0..u.cols() {
            u[(i, j)] *= p;
        }
    }
    u
}

/// Noiseless encoding of `x` as a pure density matrix.
pub fn iqp_encode(x: &[f64], config: &CircuitConfig) -> Result<DensityMatrix> {
    config.check_features(x)?;
    let u = iqp_layer_unitary(x);
    let mut psi = vec![Complex64::new(0.0, 0.0); config.dim()];
    psi[0] = Complex64::new(1.0, 0.0);
    for _ in 0..config.n_layers {
        psi = (0..psi.len())
            .map(|i| (0..psi.len()).map(|j| u[(i, j)] * psi[j]).sum())
            .collect();
    }
    DensityMatrix::from_pure(&psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_features_give_plus_state() {
        let cfg = CircuitConfig::iqp(2, 1).unwrap();
        let rho = iqp_encode(&[0.0, 0.0], &cfg).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let z = rho.matrix()[(i, j)];
                assert!((z.re - 0.25).abs() < 1e-15 && z.im.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let cfg = CircuitConfig::iqp(2, 1).unwrap();
        assert!(matches!(iqp_encode(&[0.1], &cfg), Err(Error::Validation(_))));
        assert!(iqp_encode(&[0.1, f64::NAN], &cfg).is_err());
    }

    #[test]
    fn invalid_configs() {
        assert!(CircuitConfig::iqp(0, 1).is_err());
        assert!(CircuitConfig::iqp(1, 0).is_err());
        assert!(CircuitConfig::iqp(9, 1).is_err());
    }

    #[test]
    fn layer_unitary_is_unitary() {
        let u = iqp_layer_unitary(&[0.3, 1.2, 2.9]);
        let uu = u.matmul(&u.dagger()).unwrap();
        assert!(uu.max_abs_diff(&ComplexMatrix::identity(8)).unwrap() < 1e-13);
    }

    #[test]
    fn single_qubit_layer_matches_gate_product() {
        // R_z(x) H on one qubit
        let x = 0.7;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let hm = ComplexMatrix::from_rows(&[&[(h, 0.0), (h, 0.0)], &[(h, 0.0), (-h, 0.0)]]).unwrap();
        let rz = ComplexMatrix::diagonal(&[
            Complex64::from_polar(1.0, -x / 2.0),
            Complex64::from_polar(1.0, x / 2.0),
        ]);
        let expected = rz.matmul(&hm).unwrap();
        assert!(iqp_layer_unitary(&[x]).max_abs_diff(&expected).unwrap() < 1e-15);
    }

    proptest! {
        #[test]
        fn encodings_are_pure(x in prop::collection::vec(0.0f64..std::f64::consts::PI, 1..=3), layers in 1usize..=3) {
            let cfg = CircuitConfig::iqp(x.len(), layers).unwrap();
            let rho = iqp_encode(&x, &cfg).unwrap();
            prop_assert!((rho.trace() - 1.0).abs() < 1e-10);
            prop_assert!((rho.purity() - 1.0).abs() < 1e-10);
        }
    }
}
