//! Range scaling and principal component projection onto `[0, pi]`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{symmetric_eigen, RealMatrix};

/// All parameters of a fitted scale -> project -> rescale pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaTransform {
    pub input_min: Vec<f64>,
    pub input_max: Vec<f64>,
    /// Column means of the range-scaled inputs.
    pub mean: Vec<f64>,
    /// `d x N`, column `k` is the k-th principal axis.
    pub components: RealMatrix,
    /// Covariance eigenvalues of the kept axes, largest first.
    pub explained_variance: Vec<f64>,
    /// Full covariance spectrum.
    pub eigenvalues: Vec<f64>,
    pub output_min: Vec<f64>,
    pub output_max: Vec<f64>,
}

fn unit_scale(v: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        (v - lo) / (hi - lo)
    } else {
        0.0
    }
}

fn column_range(rows: &[Vec<f64>], j: usize) -> (f64, f64) {
    rows.iter()
        .map(|r| r[j])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

impl PcaTransform {
    pub fn n_components(&self) -> usize {
        self.components.cols()
    }

    fn project(&self, x: &[f64]) -> Vec<f64> {
        let scaled: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(j, &v)| PI * unit_scale(v, self.input_min[j], self.input_max[j]) - self.mean[j])
            .collect();
        (0..self.n_components())
            .map(|k| {
                scaled
                    .iter()
                    .enumerate()
                    .map(|(j, s)| s * self.components[(j, k)])
                    .sum()
            })
            .collect()
    }

    /// Maps new rows with the fitted parameters. Held-out points may fall
    /// outside the fitted ranges and are clamped to `[0, pi]`.
    pub fn apply(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let d = self.input_min.len();
        rows.iter()
            .map(|x| {
                if x.len() != d {
                    return Err(Error::Shape(format!(
                        "row has {} features, transform expects {d}",
                        x.len()
                    )));
                }
                Ok(self
                    .project(x)
                    .iter()
                    .enumerate()
                    .map(|(k, &z)| {
                        (PI * unit_scale(z, self.output_min[k], self.output_max[k])).clamp(0.0, PI)
                    })
                    .collect())
            })
            .collect()
    }
}

/// Min-max scales each column to `[0, pi]`, centres, projects onto the top
/// `n_components` covariance eigenvectors and rescales each projected column
/// to `[0, pi]`.
///
/// Eigenvector signs are fixed so the largest-magnitude entry is positive.
pub fn pca_scale(rows: &[Vec<f64>], n_components: usize) -> Result<(Vec<Vec<f64>>, PcaTransform)> {
    let m = rows.len();
    if m < 2 {
        return Err(Error::Validation(format!("PCA needs at least 2 samples, got {m}")));
    }
    let d = rows[0].len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::Shape("ragged feature rows".into()));
    }
    if n_components == 0 || n_components > d {
        return Err(Error::Validation(format!(
            "cannot keep {n_components} components of {d} features"
        )));
    }

    let (input_min, input_max): (Vec<f64>, Vec<f64>) = (0..d).map(|j| column_range(rows, j)).unzip();
    let scaled: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .map(|(j, &v)| PI * unit_scale(v, input_min[j], input_max[j]))
                .collect()
        })
        .collect();
    let mean: Vec<f64> = (0..d)
        .map(|j| scaled.iter().map(|r| r[j]).sum::<f64>() / m as f64)
        .collect();

    let mut cov = RealMatrix::zeros(d, d);
    for r in &scaled {
        for a in 0..d {
            let da = r[a] - mean[a];
            for b in a..d {
                cov[(a, b)] += da * (r[b] - mean[b]);
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            let v = cov[(a, b)] / (m - 1) as f64;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }

    let eig = symmetric_eigen(&cov)?;
    let mut components = RealMatrix::zeros(d, n_components);
    for k in 0..n_components {
        let mut v = eig.vector(k);
        let lead = v
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
            .map(|(_, x)| x)
            .unwrap_or(1.0);
        if lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        for j in 0..d {
            components[(j, k)] = v[j];
        }
    }

    let mut transform = PcaTransform {
        input_min,
        input_max,
        mean,
        components,
        explained_variance: eig.values[..n_components].to_vec(),
        eigenvalues: eig.values.clone(),
        output_min: vec![0.0; n_components],
        output_max: vec![0.0; n_components],
    };
    let projected: Vec<Vec<f64>> = rows.iter().map(|r| transform.project(r)).collect();
    for k in 0..n_components {
        let (lo, hi) = column_range(&projected, k);
        if !(hi - lo > 1e-12) {
            return Err(Error::Validation(format!(
                "principal component {k} has zero variance"
            )));
        }
        transform.output_min[k] = lo;
        transform.output_max[k] = hi;
    }
    let out = projected
        .iter()
        .map(|z| {
            z.iter()
                .enumerate()
                .map(|(k, &v)| PI * unit_scale(v, transform.output_min[k], transform.output_max[k]))
                .collect()
        })
        .collect();
    Ok((out, transform))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_rows(m: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..m)
            .map(|i| {
                let t = rng.random_range(-1.0..1.0);
                (0..d)
                    .map(|j| t * (j + 1) as f64 + 0.3 * rng.random_range(-1.0..1.0) + i as f64 * 1e-3)
                    .collect()
            })
            .collect()
    }

    #[test]
    fn output_spans_zero_to_pi() {
        let (out, _) = pca_scale(&random_rows(50, 4, 1), 2).unwrap();
        for k in 0..2 {
            let (lo, hi) = column_range(&out, k);
            assert!(lo.abs() < 1e-12 && (hi - PI).abs() < 1e-12);
        }
    }

    #[test]
    fn axis_aligned_input_keeps_axes() {
        // square corners plus one point on the left edge
        let rows = vec![
            vec![0.0, 0.0],
            vec![PI, 0.0],
            vec![0.0, PI],
            vec![PI, PI],
            vec![0.0, PI / 2.0],
        ];
        let (out, t) = pca_scale(&rows, 2).unwrap();
        // x has the larger variance, so the axes come back in order
        assert!(t.components.max_abs_diff(&RealMatrix::identity(2)).unwrap() < 1e-9);
        for k in 0..2 {
            let (lo, hi) = column_range(&out, k);
            assert!(lo.abs() < 1e-12 && (hi - PI).abs() < 1e-12);
        }
    }

    #[test]
    fn explained_variance_is_top_of_spectrum() {
        let (_, t) = pca_scale(&random_rows(80, 5, 2), 3).unwrap();
        let top: f64 = t.eigenvalues[..3].iter().sum();
        assert!((t.explained_variance.iter().sum::<f64>() - top).abs() < 1e-12);
        assert!(t.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        let vtv = t.components.transpose().matmul(&t.components).unwrap();
        assert!(vtv.max_abs_diff(&RealMatrix::identity(3)).unwrap() < 1e-9);
    }

    #[test]
    fn apply_reproduces_fit_and_clamps() {
        let rows = random_rows(40, 3, 3);
        let (out, t) = pca_scale(&rows, 2).unwrap();
        let again = t.apply(&rows).unwrap();
        for (a, b) in out.iter().zip(&again) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        let far = t.apply(&[vec![1e3, -1e3, 1e3]]).unwrap();
        assert!(far[0].iter().all(|v| (0.0..=PI).contains(v)));
    }

    #[test]
    fn degenerate_inputs() {
        let constant = vec![vec![1.0, 2.0]; 5];
        assert!(matches!(pca_scale(&constant, 1), Err(Error::Validation(_))));
        assert!(pca_scale(&random_rows(10, 2, 4), 3).is_err());
        assert!(pca_scale(&random_rows(1, 2, 4), 1).is_err());
    }
}
