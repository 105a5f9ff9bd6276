//! Cyclic Jacobi eigensolver for small dense symmetric matrices.

use super::RealMatrix;
use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-10;
const OFF_DIAGONAL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `A = V diag(values) V^T`.
///
/// `values` are sorted in descending order and column `k` of `vectors` is the
/// unit eigenvector for `values[k]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: RealMatrix,
}

impl SymmetricEigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }
}

fn off_diagonal_norm(a: &RealMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

pub fn symmetric_eigen(a: &RealMatrix) -> Result<SymmetricEigen> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "eigen-decomposition of a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let asym = a.symmetry_error();
    if asym > SYMMETRY_TOL {
        return Err(Error::Validation(format!(
            "matrix is not symmetric (max |A_ij - A_ji| = {asym:.3e})"
        )));
    }

    let n = a.rows();
    let mut m = a.clone();
    let mut v = RealMatrix::identity(n);

    let mut converged = off_diagonal_norm(&m) < OFF_DIAGONAL_TOL;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                // exact zero on the rotated pair keeps the sweep stable
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
        converged = off_diagonal_norm(&m) < OFF_DIAGONAL_TOL;
    }
    if !converged {
        return Err(Error::NotConverged {
            what: "Jacobi eigensolver",
            iterations: sweeps,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]).then(i.cmp(&j)));

    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = RealMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, dst)] = v[(k, src)];
        }
    }
    Ok(SymmetricEigen { values, vectors })
}
