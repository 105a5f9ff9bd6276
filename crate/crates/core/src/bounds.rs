//! Closed-form kernel and margin bounds under local depolarising noise.
//!
//! Everything is expressed through the decay factor `c = (1-p)^{2LN}` and the
//! rescaled regulariser `C' = C m`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub p: f64,
    pub n_qubits: usize,
    pub n_layers: usize,
    /// Training sample count.
    pub m: usize,
    /// Box parameter `C` of the SVM.
    pub c: f64,
    pub gamma_sq_clean: f64,
    pub gamma_sq_noisy_est: Option<f64>,
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.75 + 1e-12).contains(&self.p) {
            return Err(Error::Validation(format!("p = {} outside [0, 3/4]", self.p)));
        }
        if self.m == 0 {
            return Err(Error::Validation("bounds need m >= 1".into()));
        }
        if !(self.c >= 0.0) {
            return Err(Error::Validation(format!("C = {} is negative", self.c)));
        }
        if !(self.gamma_sq_clean > 0.0) {
            return Err(Error::Validation(format!(
                "clean margin {} is not positive",
                self.gamma_sq_clean
            )));
        }
        Ok(())
    }

    pub fn c_prime(&self) -> f64 {
        self.c * self.m as f64
    }

    pub fn decay_factor(&self) -> f64 {
        decay_factor(self.p, self.n_qubits, self.n_layers)
    }
}

/// `(1-p)^{2LN}`
pub fn decay_factor(p: f64, n_qubits: usize, n_layers: usize) -> f64 {
    (1.0 - p).powi((2 * n_layers * n_qubits) as i32)
}

/// Largest value a noisy kernel entry can take given the clean entry.
pub fn kernel_noise_bound(k_clean: f64, p: f64, n_qubits: usize, n_layers: usize) -> f64 {
    let c = decay_factor(p, n_qubits, n_layers);
    c * k_clean + (1.0 - c)
}

/// `gamma^2 c / (2 (1 - C' gamma^2) - c)`
pub fn margin_upper_bound(params: &BoundParams) -> Result<f64> {
    params.validate()?;
    let c = params.decay_factor();
    let g = params.gamma_sq_clean;
    let denom = 2.0 * (1.0 - params.c_prime() * g) - c;
    if denom <= 0.0 {
        return Err(Error::InfeasibleC {
            c_prime: params.c_prime(),
            c_prime_max: c_prime_max(g, params.p, params.n_qubits, params.n_layers),
        });
    }
    Ok(g * c / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LowerCase {
    /// `c <= 1/2 < gamma^2 C'`
    CaseA,
    /// `gamma^2 C' < 1/2 <= c`
    CaseB,
    /// Neither sign pattern; the value is reported but carries no guarantee.
    Invalid,
}

impl LowerCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            LowerCase::CaseA => "case-A",
            LowerCase::CaseB => "case-B",
            LowerCase::Invalid => "invalid",
        }
    }

    pub fn is_valid(&self) -> bool {
        !matches!(self, LowerCase::Invalid)
    }
}

impl std::fmt::Display for LowerCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `gamma^2 (1 - 2c) / (2 C' gamma^2 - 1)` with its validity case.
pub fn margin_lower_bound(params: &BoundParams) -> Result<(f64, LowerCase)> {
    params.validate()?;
    let c = params.decay_factor();
    let g = params.gamma_sq_clean;
    let gc = g * params.c_prime();
    let denom = 2.0 * gc - 1.0;
    if denom == 0.0 {
        return Err(Error::SingularParameter);
    }
    let case = if c <= 0.5 && 0.5 < gc {
        LowerCase::CaseA
    } else if gc < 0.5 && 0.5 <= c {
        LowerCase::CaseB
    } else {
        LowerCase::Invalid
    };
    Ok((g * (1.0 - 2.0 * c) / denom, case))
}

/// `(2 - c) / (2 gamma^2)`: the upper bound needs `C' < C'_max`.
pub fn c_prime_max(gamma_sq_clean: f64, p: f64, n_qubits: usize, n_layers: usize) -> f64 {
    (2.0 - decay_factor(p, n_qubits, n_layers)) / (2.0 * gamma_sq_clean)
}

/// `C'_max - c / (2 gamma_noisy^2)`, or the trivial value
/// `(1 - c) / gamma^2` without a noisy-margin estimate.
pub fn c_prime_min(
    gamma_sq_clean: f64,
    gamma_sq_noisy_est: Option<f64>,
    p: f64,
    n_qubits: usize,
    n_layers: usize,
) -> Result<f64> {
    let c = decay_factor(p, n_qubits, n_layers);
    match gamma_sq_noisy_est {
        None => Ok((1.0 - c) / gamma_sq_clean),
        Some(est) if est > 0.0 && est.is_finite() => {
            Ok(c_prime_max(gamma_sq_clean, p, n_qubits, n_layers) - c / (2.0 * est))
        }
        Some(est) => Err(Error::Validation(format!(
            "noisy margin estimate {est} is not positive"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Feasibility {
    /// Half-open interval `[low, high)` of admissible `C'`.
    Range { low: f64, high: f64 },
    /// The per-noise-level intervals do not overlap.
    Rejected { low: f64, high: f64 },
}

impl Feasibility {
    pub fn contains(&self, c_prime: f64) -> bool {
        match *self {
            Feasibility::Range { low, high } => low <= c_prime && c_prime < high,
            Feasibility::Rejected { .. } => false,
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Feasibility::Range { low, high } | Feasibility::Rejected { low, high } => (low, high),
        }
    }

    pub fn is_rejected(&self) -> bool {
        matches!(self, Feasibility::Rejected { .. })
    }
}

/// Intersection over the grid of `[C'_min(p), C'_max(p))`, clipped below at
/// zero. `noisy_estimates[k]` belongs to `p_grid[k]`.
pub fn feasible_c_range(
    gamma_sq_clean: f64,
    p_grid: &[f64],
    noisy_estimates: &[Option<f64>],
    n_qubits: usize,
    n_layers: usize,
) -> Result<Feasibility> {
    if p_grid.is_empty() {
        return Err(Error::Validation("feasibility needs a non-empty p grid".into()));
    }
    if p_grid.len() != noisy_estimates.len() {
        return Err(Error::Shape(format!(
            "{} noise levels but {} margin estimates",
            p_grid.len(),
            noisy_estimates.len()
        )));
    }
    if !(gamma_sq_clean > 0.0) {
        return Err(Error::Validation(format!(
            "clean margin {gamma_sq_clean} is not positive"
        )));
    }
    let mut low = 0.0f64;
    let mut high = f64::INFINITY;
    for (&p, &est) in p_grid.iter().zip(noisy_estimates) {
        low = low.max(c_prime_min(gamma_sq_clean, est, p, n_qubits, n_layers)?);
        high = high.min(c_prime_max(gamma_sq_clean, p, n_qubits, n_layers));
    }
    Ok(if low < high {
        Feasibility::Range { low, high }
    } else {
        Feasibility::Rejected { low, high }
    })
}

/// `C = C0 / m^beta`
pub fn theoretical_c(c0: f64, m: usize, beta: f64) -> f64 {
    c0 / (m as f64).powf(beta)
}

/// `C' = C m = C0 m^{1 - beta}`
pub fn theoretical_c_prime(c0: f64, m: usize, beta: f64) -> f64 {
    theoretical_c(c0, m, beta) * m as f64
}

/// Every bound quantity for one parameter set. Infeasible or singular
/// parameters show up as `None` instead of an error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub p: f64,
    pub decay_factor: f64,
    pub upper: Option<f64>,
    pub lower: Option<f64>,
    pub lower_case: LowerCase,
    pub c_prime: f64,
    pub c_prime_max: f64,
    pub c_prime_min: f64,
    /// `C'_min <= C' < C'_max` at this noise level.
    pub feasible: bool,
}

pub fn bound_report(params: &BoundParams) -> Result<BoundReport> {
    params.validate()?;
    let (n, l) = (params.n_qubits, params.n_layers);
    let upper = match margin_upper_bound(params) {
        Ok(v) => Some(v),
        Err(Error::InfeasibleC { .. }) => None,
        Err(e) => return Err(e),
    };
    let (lower, lower_case) = match margin_lower_bound(params) {
        Ok((v, case)) => (Some(v), case),
        Err(Error::SingularParameter) => (None, LowerCase::Invalid),
        Err(e) => return Err(e),
    };
    let cmax = c_prime_max(params.gamma_sq_clean, params.p, n, l);
    let cmin = c_prime_min(params.gamma_sq_clean, params.gamma_sq_noisy_est, params.p, n, l)?;
    let cp = params.c_prime();
    Ok(BoundReport {
        p: params.p,
        decay_factor: params.decay_factor(),
        upper,
        lower,
        lower_case,
        c_prime: cp,
        c_prime_max: cmax,
        c_prime_min: cmin,
        feasible: cmin.max(0.0) <= cp && cp < cmax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(p: f64, n: usize, l: usize, c_prime: f64, g: f64) -> BoundParams {
        BoundParams {
            p,
            n_qubits: n,
            n_layers: l,
            m: 100,
            c: c_prime / 100.0,
            gamma_sq_clean: g,
            gamma_sq_noisy_est: None,
        }
    }

    #[test]
    fn kernel_bound_values() {
        assert_eq!(kernel_noise_bound(0.3, 0.0, 2, 2), 0.3);
        let k = 0.4;
        let expected = 0.0625 * k + (1.0 - 0.0625);
        assert!((kernel_noise_bound(k, 0.75, 1, 1) - expected).abs() < 1e-15);
    }

    #[test]
    fn hard_margin_upper_bound() {
        for g in [0.01, 0.3, 2.0] {
            assert_eq!(margin_upper_bound(&params(0.0, 2, 1, 0.0, g)).unwrap(), g);
            let max_noise = margin_upper_bound(&params(0.75, 1, 1, 0.0, g)).unwrap();
            assert!((max_noise - g * 0.0625 / 1.9375).abs() < 1e-15);
            assert!((max_noise / g - 0.032258).abs() < 1e-6);
        }
    }

    #[test]
    fn heart_style_range_gives_finite_bounds() {
        let g = 1.0 / 42.2;
        for c_prime in [0.0, 5.0, 21.0] {
            for step in 0..=15 {
                let p = step as f64 / 20.0;
                let u = margin_upper_bound(&params(p, 2, 1, c_prime, g)).unwrap();
                assert!(u.is_finite() && u > 0.0, "C'={c_prime} p={p} -> {u}");
            }
        }
    }

    #[test]
    fn upper_bound_infeasible() {
        let g = 0.1;
        // C'_max(p = 0) = 5
        match margin_upper_bound(&params(0.0, 1, 1, 5.0, g)) {
            Err(Error::InfeasibleC { c_prime_max, .. }) => assert!((c_prime_max - 5.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lower_bound_case_b_arithmetic() {
        // choose p with (1-p)^2 = 0.6 for N = L = 1
        let p = 1.0 - 0.6f64.sqrt();
        let (v, case) = margin_lower_bound(&params(p, 1, 1, 1.0, 0.1)).unwrap();
        assert_eq!(case, LowerCase::CaseB);
        assert!((v - 0.025).abs() < 1e-12);
    }

    #[test]
    fn lower_bound_singular() {
        assert!(matches!(
            margin_lower_bound(&params(0.1, 1, 1, 5.0, 0.1)),
            Err(Error::SingularParameter)
        ));
    }

    #[test]
    fn lower_bound_tags_follow_signs() {
        for ip in 0..=15 {
            for ic in 0..40 {
                let p = ip as f64 / 20.0;
                let c_prime = ic as f64 * 0.37 + 0.01;
                let g = 0.1;
                let prm = params(p, 2, 1, c_prime, g);
                let c = prm.decay_factor();
                let num = 1.0 - 2.0 * c;
                let den = 2.0 * c_prime * g - 1.0;
                let Ok((v, case)) = margin_lower_bound(&prm) else { continue };
                let expect = if num >= 0.0 && den > 0.0 {
                    LowerCase::CaseA
                } else if num <= 0.0 && den < 0.0 {
                    LowerCase::CaseB
                } else {
                    LowerCase::Invalid
                };
                assert_eq!(case, expect, "p={p} C'={c_prime}");
                if case.is_valid() {
                    assert!(v >= 0.0);
                }
            }
        }
    }

    #[test]
    fn c_prime_limits() {
        assert!((c_prime_max(0.1, 0.0, 2, 2) - 5.0).abs() < 1e-12);
        assert!((c_prime_max(0.25, 0.0, 3, 1) - 2.0).abs() < 1e-12);
        assert_eq!(c_prime_min(0.1, Some(0.1), 0.0, 2, 1).unwrap(), 0.0);
        assert_eq!(c_prime_min(0.1, None, 0.0, 2, 1).unwrap(), 0.0);
        assert!(c_prime_min(0.1, Some(0.0), 0.2, 2, 1).is_err());
        assert!(c_prime_min(0.1, Some(-1.0), 0.2, 2, 1).is_err());
    }

    #[test]
    fn single_noiseless_level_range() {
        let g = 0.1;
        let r = feasible_c_range(g, &[0.0], &[Some(g)], 2, 2).unwrap();
        assert_eq!(r, Feasibility::Range { low: 0.0, high: 5.0 });
        assert!(r.contains(0.0) && r.contains(4.99) && !r.contains(5.0));
    }

    #[test]
    fn rejection_is_a_value() {
        // an unchanged margin estimate at p = 0.5 puts C'_min(0.5) = 9.375
        // above C'_max(0) = 5
        let g = 0.1;
        let r = feasible_c_range(g, &[0.0, 0.5], &[Some(g), Some(g)], 2, 1).unwrap();
        match r {
            Feasibility::Rejected { low, high } => {
                assert!((low - 9.375).abs() < 1e-12 && (high - 5.0).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
        let r = feasible_c_range(g, &[0.0, 0.7], &[Some(g), None], 2, 1).unwrap();
        assert!(r.is_rejected());
    }

    #[test]
    fn theoretical_c_values() {
        assert_eq!(theoretical_c_prime(7.5, 250, 1.0), 7.5);
        assert!((theoretical_c_prime(10.0, 303, 0.0) - 3030.0).abs() < 1e-9);
        assert!((theoretical_c_prime(1000.0, 12, 3.0) - 1000.0 / 144.0).abs() < 1e-12);
        assert!((theoretical_c(1000.0, 12, 3.0) - 1000.0 / 1728.0).abs() < 1e-15);
    }

    #[test]
    fn report_marks_infeasible_upper() {
        let r = bound_report(&params(0.0, 1, 1, 6.0, 0.1)).unwrap();
        assert_eq!(r.upper, None);
        assert!(!r.feasible);
        let r = bound_report(&params(0.2, 1, 1, 1.0, 0.1)).unwrap();
        assert!(r.upper.unwrap() >= 0.0);
    }

    proptest! {
        #[test]
        fn hard_margin_bound_decreases_with_noise(g in 0.001f64..10.0, n in 1usize..=3, l in 1usize..=3,
                                                   p1 in 0.0f64..=0.75, p2 in 0.0f64..=0.75) {
            let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
            let a = margin_upper_bound(&params(lo, n, l, 0.0, g)).unwrap();
            let b = margin_upper_bound(&params(hi, n, l, 0.0, g)).unwrap();
            prop_assert!(b <= a * (1.0 + 1e-12));
        }

        #[test]
        fn upper_bound_non_negative_when_defined(g in 0.001f64..1.0, cp in 0.0f64..200.0, p in 0.0f64..=0.75,
                                                 n in 1usize..=3, l in 1usize..=2) {
            if let Ok(u) = margin_upper_bound(&params(p, n, l, cp, g)) {
                prop_assert!(u >= 0.0);
            }
        }

        #[test]
        fn c_prime_max_grows_with_noise(g in 0.001f64..10.0, p1 in 0.0f64..=0.75, p2 in 0.0f64..=0.75) {
            let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
            prop_assert!(c_prime_max(g, lo, 2, 2) <= c_prime_max(g, hi, 2, 2));
        }

        #[test]
        fn c_prime_min_below_max(g in 0.001f64..10.0, frac in 0.001f64..=1.0, p in 0.0f64..=0.75,
                                 n in 1usize..=3, l in 1usize..=2) {
            let est = g * frac;
            prop_assert!(c_prime_min(g, Some(est), p, n, l).unwrap() <= c_prime_max(g, p, n, l));
        }
    }
}
