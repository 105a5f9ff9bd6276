//! Pauli-basis expansion of the noisy kernel under one layer of local
//! depolarising noise.
//!
//! Writing `rho = 2^{-N} sum_mu r_mu sigma_mu` with `r_mu = Tr(rho sigma_mu)`,
//! conjugation by a Kraus operator `K_n = sqrt(c_n) sigma_n` maps each Pauli
//! string to `c_n eta_{n,mu} sigma_mu`. The noisy overlap is then a sum over
//! Kraus indices `m`, `n` and Pauli strings `mu`.

use super::DensityMatrix;
use crate::error::{Error, Result};
use crate::numerics::{kron_all, pauli, ComplexMatrix};

/// Expansion is enumerated term by term, so it is restricted to small
/// registers.
pub const MAX_EXACT_QUBITS: usize = 3;

/// Sign in `sigma_i sigma_j sigma_i = eta sigma_j`.
pub fn eta(i: usize, j: usize) -> f64 {
    if i == 0 || j == 0 || i == j {
        1.0
    } else {
        -1.0
    }
}

/// Weight of Kraus index `n`: `1 - p` for the identity, `p/3` otherwise.
fn kraus_weight(n: usize, p: f64) -> f64 {
    if n == 0 {
        1.0 - p
    } else {
        p / 3.0
    }
}

/// Digits of `index` in base 4, qubit 0 first.
fn base4_digits(mut index: usize, n: usize) -> Vec<usize> {
    let mut d = vec![0; n];
    for k in (0..n).rev() {
        d[k] = index % 4;
        index /= 4;
    }
    d
}

pub fn pauli_string(indices: &[usize]) -> ComplexMatrix {
    let factors: Vec<ComplexMatrix> = indices.iter().map(|&a| pauli(a)).collect();
    kron_all(&factors)
}

/// `r_mu = Tr(rho sigma_mu)` for all `4^N` strings, `mu` in base-4 order
/// with qubit 0 most significant.
pub fn pauli_coefficients(rho: &DensityMatrix) -> Result<Vec<f64>> {
    let n = rho.n_qubits();
    (0..1usize << (2 * n))
        .map(|idx| {
            let sigma = pauli_string(&base4_digits(idx, n));
            Ok(rho.matrix().trace_of_product(&sigma)?.re)
        })
        .collect()
}

/// Noisy kernel between the images of two noiseless states under one layer
/// of the local channel with probability `p` on every qubit,
///
/// `(1-p)^{2N} K_ij + 2^{-N} sum_{(m,n) != (0,0)} sum_mu r^i_mu r^j_mu
///  prod_k c_{n_k} c_{m_k} eta_{n_k,mu_k} eta_{m_k,mu_k}`.
pub fn exact_noisy_kernel_element(
    rho_i: &DensityMatrix,
    rho_j: &DensityMatrix,
    p: f64,
) -> Result<f64> {
    let n = rho_i.n_qubits();
    if rho_j.n_qubits() != n {
        return Err(Error::Shape(format!(
            "kernel between {n}-qubit and {}-qubit states",
            rho_j.n_qubits()
        )));
    }
    if n > MAX_EXACT_QUBITS {
        return Err(Error::UnsupportedSize(format!(
            "exact kernel expansion supports at most {MAX_EXACT_QUBITS} qubits, got {n}"
        )));
    }
    if !(0.0..=super::LOCAL_P_MAX + 1e-12).contains(&p) {
        return Err(Error::Validation(format!(
            "local depolarising probability {p} outside [0, 3/4]"
        )));
    }
    let p = p.min(super::LOCAL_P_MAX);

    let ri = pauli_coefficients(rho_i)?;
    let rj = pauli_coefficients(rho_j)?;
    let strings = 1usize << (2 * n);
    let digits: Vec<Vec<usize>> = (0..strings).map(|s| base4_digits(s, n)).collect();
    let norm = (1usize << n) as f64;

    let clean: f64 = ri.iter().zip(&rj).map(|(a, b)| a * b).sum::<f64>() / norm;
    let mut correction = 0.0;
    for (mi, m) in digits.iter().enumerate() {
        for (ni, nn) in digits.iter().enumerate() {
            if mi == 0 && ni == 0 {
                continue;
            }
            for (mu, mu_d) in digits.iter().enumerate() {
                let mut w = ri[mu] * rj[mu];
                if w == 0.0 {
                    continue;
                }
                for k in 0..n {
                    w *= kraus_weight(nn[k], p)
                        * kraus_weight(m[k], p)
                        * eta(nn[k], mu_d[k])
                        * eta(m[k], mu_d[k]);
                }
                correction += w;
            }
        }
    }
    Ok((1.0 - p).powi(2 * n as i32) * clean + correction / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{apply_local_depolarizing_all, kernel_element};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eta_matches_pauli_algebra() {
        for i in 0..4 {
            for j in 0..4 {
                let lhs = pauli(i).matmul(&pauli(j)).unwrap().matmul(&pauli(i)).unwrap();
                let rhs = pauli(j).scale_real(eta(i, j));
                assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-15, "eta({i},{j})");
            }
        }
    }

    #[test]
    fn coefficients_reconstruct_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let rho = DensityMatrix::random_mixed(2, &mut rng);
        let r = pauli_coefficients(&rho).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-12);
        let mut sum = ComplexMatrix::zeros(4, 4);
        for (idx, &c) in r.iter().enumerate() {
            sum = sum.add(&pauli_string(&base4_digits(idx, 2)).scale_real(c / 4.0)).unwrap();
        }
        assert!(sum.max_abs_diff(rho.matrix()).unwrap() < 1e-12);
    }

    #[test]
    fn limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for n in 1..=3 {
            let a = DensityMatrix::random_pure(n, &mut rng);
            let b = DensityMatrix::random_pure(n, &mut rng);
            let k = kernel_element(&a, &b).unwrap();
            assert!((exact_noisy_kernel_element(&a, &b, 0.0).unwrap() - k).abs() < 1e-12);
            let flat = 1.0 / (1 << n) as f64;
            assert!((exact_noisy_kernel_element(&a, &b, 0.75).unwrap() - flat).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_channel_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for n in 1..=2 {
            for step in 1..=7 {
                let p = step as f64 / 10.0;
                let a = DensityMatrix::random_pure(n, &mut rng);
                let b = DensityMatrix::random_pure(n, &mut rng);
                let na = apply_local_depolarizing_all(&a, p).unwrap();
                let nb = apply_local_depolarizing_all(&b, p).unwrap();
                let simulated = kernel_element(&na, &nb).unwrap();
                let exact = exact_noisy_kernel_element(&a, &b, p).unwrap();
                assert!((simulated - exact).abs() < 1e-10, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn rejects_large_registers() {
        let a = DensityMatrix::zero_state(4);
        assert!(matches!(
            exact_noisy_kernel_element(&a, &a, 0.1),
            Err(Error::UnsupportedSize(_))
        ));
    }
}
