#![allow(dead_code)]

use qklab_core::numerics::RealMatrix;
use qklab_core::quantum::{kernel_matrix, CircuitConfig, KernelMatrix, NoiseSpec};
use qklab_core::svm::LabeledSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_features(m: usize, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..m)
        .map(|_| (0..n).map(|_| rng.random_range(0.0..std::f64::consts::PI)).collect())
        .collect()
}

/// Labels with both classes present.
pub fn random_labels(m: usize, rng: &mut ChaCha8Rng) -> LabeledSet {
    let mut y: Vec<f64> = (0..m)
        .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    y[0] = 1.0;
    y[m - 1] = -1.0;
    LabeledSet::new(y).unwrap()
}

pub fn random_quantum_kernel(m: usize, n: usize, rng: &mut ChaCha8Rng) -> KernelMatrix {
    let cfg = CircuitConfig::iqp(n, 1).unwrap();
    kernel_matrix(&random_features(m, n, rng), &cfg, &NoiseSpec::none(&cfg)).unwrap()
}

fn dual_value(alpha: &[f64], y: &[f64], k: &RealMatrix) -> f64 {
    let m = alpha.len();
    let mut quad = 0.0;
    for i in 0..m {
        for j in 0..m {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k[(i, j)];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Exhaustive maximisation of the dual over the feasible box slice.
///
/// The last coefficient is eliminated through the equality constraint; the
/// remaining ones are searched on a grid of radius `R` around the incumbent.
/// The grid is recentred on any improvement and halved when the centre wins.
pub fn brute_force_dual(k: &KernelMatrix, labels: &LabeledSet, c: f64) -> (f64, Vec<f64>) {
    const R: i64 = 3;
    let y = labels.as_slice();
    let m = y.len();
    let d = m - 1;
    let km = k.as_matrix();

    let complete = |free: &[f64]| -> Option<Vec<f64>> {
        let s: f64 = free.iter().zip(y).map(|(a, y)| a * y).sum();
        let last = -y[d] * s;
        if !(-1e-15..=c + 1e-15).contains(&last) {
            return None;
        }
        let mut a = free.to_vec();
        a.push(last.clamp(0.0, c));
        Some(a)
    };

    // coarse pass over the full box
    let coarse = 10i64;
    let mut best_free = vec![0.0; d];
    let mut best = 0.0;
    let total = (coarse + 1).pow(d as u32);
    for code in 0..total {
        let mut rem = code;
        let free: Vec<f64> = (0..d)
            .map(|_| {
                let v = rem % (coarse + 1);
                rem /= coarse + 1;
                c * v as f64 / coarse as f64
            })
            .collect();
        if let Some(a) = complete(&free) {
            let v = dual_value(&a, y, km);
            if v > best {
                best = v;
                best_free = free;
            }
        }
    }

    let mut h = c / coarse as f64;
    let side = 2 * R + 1;
    while h > 1e-11 * c.max(1.0) {
        let mut moved = false;
        let centre = best_free.clone();
        for code in 0..side.pow(d as u32) {
            let mut rem = code;
            let free: Vec<f64> = centre
                .iter()
                .map(|&x0| {
                    let off = rem % side - R;
                    rem /= side;
                    (x0 + h * off as f64).clamp(0.0, c)
                })
                .collect();
            if let Some(a) = complete(&free) {
                let v = dual_value(&a, y, km);
                if v > best + 1e-15 {
                    best = v;
                    best_free = free;
                    moved = true;
                }
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    let alpha = complete(&best_free).expect("incumbent is feasible");
    (best, alpha)
}
