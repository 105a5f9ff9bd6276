//! Sequential minimal optimisation for the soft-margin dual with a
//! precomputed kernel.
//!
//! Minimises `f(a) = 1/2 a^T Q a - e^T a` with `Q_ij = y_i y_j K_ij` over
//! `0 <= a_i <= C`, `y^T a = 0`, updating the maximal violating pair at each
//! step.

use serde::{Deserialize, Serialize};

use super::LabeledSet;
use crate::error::{Error, Result};
use crate::quantum::KernelMatrix;

const TAU: f64 = 1e-12;

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSolution {
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    /// Dual objective `sum a - 1/2 a^T Q a`.
    pub objective: f64,
    /// Maximal violating pair gap at exit.
    pub kkt_violation: f64,
    pub iterations: usize,
}

impl DualSolution {
    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn l1_norm(&self) -> f64 {
        self.alphas.iter().sum()
    }

    pub fn support_count(&self) -> usize {
        self.alphas.iter().filter(|&&a| a > 0.0).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl SolverOptions {
    pub fn new(c: f64) -> Self {
        Self {
            c,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }
}

struct Problem<'a> {
    k: &'a KernelMatrix,
    y: &'a [f64],
    c: f64,
}

impl Problem<'_> {
    fn q(&self, i: usize, j: usize) -> f64 {
        self.y[i] * self.y[j] * self.k.get(i, j)
    }

    fn in_up(&self, t: usize, a: f64) -> bool {
        (self.y[t] > 0.0 && a < self.c) || (self.y[t] < 0.0 && a > 0.0)
    }

    fn in_low(&self, t: usize, a: f64) -> bool {
        (self.y[t] < 0.0 && a < self.c) || (self.y[t] > 0.0 && a > 0.0)
    }

    fn gradient(&self, alpha: &[f64]) -> Vec<f64> {
        let m = alpha.len();
        let mut g = vec![-1.0; m];
        for (j, &aj) in alpha.iter().enumerate() {
            if aj == 0.0 {
                continue;
            }
            for (t, gt) in g.iter_mut().enumerate() {
                *gt += self.q(t, j) * aj;
            }
        }
        g
    }

    /// Maximal violating pair `(i, j, gap)`; lowest index wins ties.
    fn select(&self, alpha: &[f64], g: &[f64]) -> Option<(usize, usize, f64)> {
        let mut i = None;
        let mut gmax = f64::NEG_INFINITY;
        let mut j = None;
        let mut gmin = f64::INFINITY;
        for t in 0..alpha.len() {
            let v = -self.y[t] * g[t];
            if self.in_up(t, alpha[t]) && v > gmax {
                gmax = v;
                i = Some(t);
            }
            if self.in_low(t, alpha[t]) && v < gmin {
                gmin = v;
                j = Some(t);
            }
        }
        Some((i?, j?, gmax - gmin))
    }

    /// Analytic two-variable step clipped to the box.
    fn update_pair(&self, alpha: &mut [f64], g: &[f64], i: usize, j: usize) {
        let c = self.c;
        let (qii, qjj, qij) = (self.q(i, i), self.q(j, j), self.q(i, j));
        if self.y[i] != self.y[j] {
            let mut quad = qii + qjj + 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-g[i] - g[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = qii + qjj - 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (g[i] - g[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
    }

    /// Mean of `-y_i G_i` over free vectors, else the midpoint of the
    /// interval of biases consistent with the KKT conditions.
    fn bias(&self, alpha: &[f64], g: &[f64]) -> f64 {
        let mut free_sum = 0.0;
        let mut free = 0usize;
        let mut lower = f64::NEG_INFINITY;
        let mut upper = f64::INFINITY;
        for t in 0..alpha.len() {
            let f = -self.y[t] * g[t];
            if alpha[t] > 0.0 && alpha[t] < self.c {
                free_sum += f;
                free += 1;
            } else if (alpha[t] == 0.0) == (self.y[t] > 0.0) {
                lower = lower.max(f);
            } else {
                upper = upper.min(f);
            }
        }
        if free > 0 {
            free_sum / free as f64
        } else if lower.is_finite() && upper.is_finite() {
            0.5 * (lower + upper)
        } else if lower.is_finite() {
            lower
        } else if upper.is_finite() {
            upper
        } else {
            0.0
        }
    }

    fn objective(&self, alpha: &[f64], g: &[f64]) -> f64 {
        // f = 1/2 a^T (G + e) - e^T a, dual value is -f
        alpha
            .iter()
            .zip(g)
            .map(|(a, gi)| a - 0.5 * a * (gi + 1.0))
            .sum()
    }

    fn finish(&self, alpha: Vec<f64>, g: &[f64], gap: f64, iterations: usize) -> DualSolution {
        DualSolution {
            bias: self.bias(&alpha, g),
            objective: self.objective(&alpha, g),
            c: self.c,
            kkt_violation: gap.max(0.0),
            iterations,
            alphas: alpha,
        }
    }
}

pub fn solve_dual(
    kernel: &KernelMatrix,
    labels: &LabeledSet,
    c: f64,
    tol: f64,
) -> Result<DualSolution> {
    solve_dual_with(kernel, labels, &SolverOptions::new(c).with_tol(tol))
}

pub fn solve_dual_with(
    kernel: &KernelMatrix,
    labels: &LabeledSet,
    opts: &SolverOptions,
) -> Result<DualSolution> {
    let m = labels.len();
    if kernel.size() != m {
        return Err(Error::Shape(format!(
            "kernel of size {} for {m} labels",
            kernel.size()
        )));
    }
    if !(opts.c > 0.0 && opts.c.is_finite()) {
        return Err(Error::Validation(format!("C must be positive, got {}", opts.c)));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Validation(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    labels.require_both_classes()?;

    let prob = Problem {
        k: kernel,
        y: labels.as_slice(),
        c: opts.c,
    };
    let mut alpha = vec![0.0; m];
    let mut g = vec![-1.0; m];
    let mut best: Option<(f64, Vec<f64>)> = None;

    let mut iter = 0;
    loop {
        let Some((i, j, mut gap)) = prob.select(&alpha, &g) else {
            return Err(Error::Invariant("empty working set".into()));
        };
        if gap <= opts.tol {
            // refresh the incrementally updated gradient before accepting
            g = prob.gradient(&alpha);
            match prob.select(&alpha, &g) {
                Some((_, _, fresh)) if fresh <= opts.tol => {
                    return Ok(prob.finish(alpha, &g, fresh, iter));
                }
                Some((_, _, fresh)) => gap = fresh,
                None => return Err(Error::Invariant("empty working set".into())),
            }
        }
        if best.as_ref().is_none_or(|(b, _)| gap < *b) {
            best = Some((gap, alpha.clone()));
        }
        if iter >= opts.max_iter {
            let (violation, best_alpha) = best.expect("set above");
            let bg = prob.gradient(&best_alpha);
            return Err(Error::Convergence {
                iterations: iter,
                violation,
                best: Box::new(prob.finish(best_alpha, &bg, violation, iter)),
            });
        }
        let (ai, aj) = (alpha[i], alpha[j]);
        prob.update_pair(&mut alpha, &g, i, j);
        let (di, dj) = (alpha[i] - ai, alpha[j] - aj);
        if di == 0.0 && dj == 0.0 {
            // no progress possible at this precision
            g = prob.gradient(&alpha);
            let fresh = prob.select(&alpha, &g).map(|s| s.2).unwrap_or(0.0);
            log::debug!("stalled SMO step at iteration {iter}, gap {fresh:.3e}");
            if fresh <= opts.tol {
                return Ok(prob.finish(alpha, &g, fresh, iter));
            }
            let (violation, best_alpha) = best.expect("set above");
            let bg = prob.gradient(&best_alpha);
            return Err(Error::Convergence {
                iterations: iter,
                violation,
                best: Box::new(prob.finish(best_alpha, &bg, violation, iter)),
            });
        }
        for (t, gt) in g.iter_mut().enumerate() {
            *gt += prob.q(t, i) * di + prob.q(t, j) * dj;
        }
        iter += 1;
    }
}
