//! Depolarising channels and the noisy encoding pipeline.

use serde::{Deserialize, Serialize};

use super::{iqp_encode, iqp_layer_unitary, CircuitConfig, DensityMatrix};
use crate::error::{Error, Result};
use crate::numerics::{kron_all, pauli, ComplexMatrix};

/// Largest probability of the local channel; at this value it is fully
/// depolarising.
pub const LOCAL_P_MAX: f64 = 0.75;

/// Slack for grid values such as `15 * 0.05` that land a rounding error
/// above an endpoint.
const RANGE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseModel {
    None,
    Local,
    Global,
}

impl std::fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NoiseModel::None => "none",
            NoiseModel::Local => "local",
            NoiseModel::Global => "global",
        })
    }
}

impl std::str::FromStr for NoiseModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(NoiseModel::None),
            "local" => Ok(NoiseModel::Local),
            "global" => Ok(NoiseModel::Global),
            other => Err(Error::Config(format!("unknown noise model '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub model: NoiseModel,
    pub p: f64,
    pub n_qubits: usize,
    pub n_layers: usize,
}

fn check_probability(p: f64, max: f64, what: &str) -> Result<f64> {
    if !p.is_finite() || p < -RANGE_SLACK || p > max + RANGE_SLACK {
        return Err(Error::Validation(format!(
            "{what} probability {p} outside [0, {max}]"
        )));
    }
    Ok(p.clamp(0.0, max))
}

impl NoiseSpec {
    pub fn new(model: NoiseModel, p: f64, n_qubits: usize, n_layers: usize) -> Result<Self> {
        let p = match model {
            NoiseModel::None => 0.0,
            NoiseModel::Local => check_probability(p, LOCAL_P_MAX, "local depolarising")?,
            NoiseModel::Global => check_probability(p, 1.0, "global depolarising")?,
        };
        Ok(Self {
            model,
            p,
            n_qubits,
            n_layers,
        })
    }

    pub fn none(config: &CircuitConfig) -> Self {
        Self {
            model: NoiseModel::None,
            p: 0.0,
            n_qubits: config.n_qubits,
            n_layers: config.n_layers,
        }
    }

    pub fn local(p: f64, config: &CircuitConfig) -> Result<Self> {
        Self::new(NoiseModel::Local, p, config.n_qubits, config.n_layers)
    }

    pub fn global(p: f64, config: &CircuitConfig) -> Result<Self> {
        Self::new(NoiseModel::Global, p, config.n_qubits, config.n_layers)
    }

    fn check_matches(&self, config: &CircuitConfig) -> Result<()> {
        if self.n_qubits != config.n_qubits || self.n_layers != config.n_layers {
            return Err(Error::Validation(format!(
                "noise spec is for N={}, L={} but the circuit has N={}, L={}",
                self.n_qubits, self.n_layers, config.n_qubits, config.n_layers
            )));
        }
        Ok(())
    }
}

/// Full-register operator acting as `op` on `qubit` and identity elsewhere.
pub fn embed_single_qubit(op: &ComplexMatrix, qubit: usize, n_qubits: usize) -> ComplexMatrix {
    let factors: Vec<ComplexMatrix> = (0..n_qubits)
        .map(|k| {
            if k == qubit {
                op.clone()
            } else {
                ComplexMatrix::identity(2)
            }
        })
        .collect();
    kron_all(&factors)
}

/// Kraus operators `sqrt(1-p) I, sqrt(p/3) X, sqrt(p/3) Y, sqrt(p/3) Z`
/// embedded on `qubit`.
pub fn local_kraus_operators(p: f64, qubit: usize, n_qubits: usize) -> Vec<ComplexMatrix> {
    let w = [(1.0 - p).sqrt(), (p / 3.0).sqrt(), (p / 3.0).sqrt(), (p / 3.0).sqrt()];
    (0..4)
        .map(|a| embed_single_qubit(&pauli(a), qubit, n_qubits).scale_real(w[a]))
        .collect()
}

/// Generic Kraus sum `sum_i K_i rho K_i^dagger`.
pub fn apply_kraus(rho: &DensityMatrix, kraus: &[ComplexMatrix]) -> Result<DensityMatrix> {
    let dim = rho.dim();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for k in kraus {
        let term = k.matmul(rho.matrix())?.matmul(&k.dagger())?;
        out.add_scaled_assign(1.0, &term)?;
    }
    DensityMatrix::from_matrix(rho.n_qubits(), out)
}

pub fn apply_local_depolarizing(rho: &DensityMatrix, p: f64, qubit: usize) -> Result<DensityMatrix> {
    let p = check_probability(p, LOCAL_P_MAX, "local depolarising")?;
    if qubit >= rho.n_qubits() {
        return Err(Error::Validation(format!(
            "qubit {qubit} out of range for a {}-qubit state",
            rho.n_qubits()
        )));
    }
    apply_kraus(rho, &local_kraus_operators(p, qubit, rho.n_qubits()))
}

/// Local channel on every qubit in turn.
pub fn apply_local_depolarizing_all(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    for q in 0..rho.n_qubits() {
        out = apply_local_depolarizing(&out, p, q)?;
    }
    Ok(out)
}

/// `(1-p) rho + p I / 2^N`
pub fn apply_global_depolarizing(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    let p = check_probability(p, 1.0, "global depolarising")?;
    let dim = rho.dim();
    let mut m = rho.matrix().scale_real(1.0 - p);
    m.add_scaled_assign(p / dim as f64, &ComplexMatrix::identity(dim))?;
    DensityMatrix::from_matrix(rho.n_qubits(), m)
}

/// Encodes `x` and applies `noise` in the layout of its model: the local
/// channel on every qubit after each layer, or a single global channel at
/// the end with the scaled probability `1 - (1-p)^L`.
pub fn encode_with_noise(
    x: &[f64],
    config: &CircuitConfig,
    noise: &NoiseSpec,
) -> Result<DensityMatrix> {
    noise.check_matches(config)?;
    match noise.model {
        NoiseModel::None => iqp_encode(x, config),
        NoiseModel::Global => {
            let rho = iqp_encode(x, config)?;
            let p_end = 1.0 - (1.0 - noise.p).powi(config.n_layers as i32);
            apply_global_depolarizing(&rho, p_end)
        }
        NoiseModel::Local => {
            config.check_features(x)?;
            let u = iqp_layer_unitary(x);
            let mut rho = DensityMatrix::zero_state(config.n_qubits);
            for _ in 0..config.n_layers {
                rho = apply_local_depolarizing_all(&rho.evolve(&u)?, noise.p)?;
            }
            Ok(rho)
        }
    }
}

/// Global channel with probability `p` after every layer instead of once
/// at the end. Equivalent to [`encode_with_noise`] with the global model.
pub fn encode_with_global_per_layer(
    x: &[f64],
    config: &CircuitConfig,
    p: f64,
) -> Result<DensityMatrix> {
    config.check_features(x)?;
    let u = iqp_layer_unitary(x);
    let mut rho = DensityMatrix::zero_state(config.n_qubits);
    for _ in 0..config.n_layers {
        rho = apply_global_depolarizing(&rho.evolve(&u)?, p)?;
    }
    Ok(rho)
}

/// Probability that no error acts over the whole circuit.
pub fn survival_probability(noise: &NoiseSpec) -> f64 {
    let l = noise.n_layers as i32;
    match noise.model {
        NoiseModel::None => 1.0,
        NoiseModel::Global => (1.0 - noise.p).powi(l),
        NoiseModel::Local => (1.0 - noise.p).powi(noise.n_qubits as i32 * l),
    }
}

/// End-of-circuit global probability with the same survival as the local
/// model: `1 - (1-p)^{NL}`.
pub fn equivalent_global_p(p_local: f64, n_qubits: usize, n_layers: usize) -> f64 {
    1.0 - (1.0 - p_local).powi((n_qubits * n_layers) as i32)
}

/// Per-layer global probability matching the local model's survival:
/// `1 - (1-p)^N`.
pub fn matched_global_layer_p(p_local: f64, n_qubits: usize) -> f64 {
    1.0 - (1.0 - p_local).powi(n_qubits as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Complex64;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_state(n: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
        if rand::Rng::random_bool(rng, 0.5) {
            DensityMatrix::random_pure(n, rng)
        } else {
            DensityMatrix::random_mixed(n, rng)
        }
    }

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        a.max_abs_diff(b).unwrap() < tol
    }

    #[test]
    fn zero_probability_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_state(2, &mut rng);
        let out = apply_local_depolarizing(&rho, 0.0, 1).unwrap();
        assert!(close(out.matrix(), rho.matrix(), 1e-15));
        let out = apply_global_depolarizing(&rho, 0.0).unwrap();
        assert!(close(out.matrix(), rho.matrix(), 1e-15));
    }

    #[test]
    fn ground_state_single_qubit() {
        let rho = DensityMatrix::zero_state(1);
        for p in [0.1, 0.3, 0.75] {
            let out = apply_local_depolarizing(&rho, p, 0).unwrap();
            let expected = ComplexMatrix::diagonal(&[
                Complex64::new(1.0 - 2.0 * p / 3.0, 0.0),
                Complex64::new(2.0 * p / 3.0, 0.0),
            ]);
            assert!(close(out.matrix(), &expected, 1e-15));
        }
    }

    #[test]
    fn full_twirl_gives_maximally_mixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mixed = DensityMatrix::maximally_mixed(2);
        for _ in 0..10 {
            let rho = random_state(2, &mut rng);
            let out = apply_local_depolarizing_all(&rho, 0.75).unwrap();
            assert!(close(out.matrix(), mixed.matrix(), 1e-12));
        }
    }

    #[test]
    fn out_of_range_probabilities() {
        let rho = DensityMatrix::zero_state(1);
        assert!(matches!(apply_local_depolarizing(&rho, 0.8, 0), Err(Error::Validation(_))));
        assert!(apply_local_depolarizing(&rho, -0.1, 0).is_err());
        assert!(apply_local_depolarizing(&rho, 0.1, 1).is_err());
        assert!(apply_global_depolarizing(&rho, 1.1).is_err());
        assert!(NoiseSpec::new(NoiseModel::Local, 0.76, 1, 1).is_err());
        assert!(NoiseSpec::new(NoiseModel::Global, 0.9, 1, 1).is_ok());
        // 15 * 0.05 rounds just above 0.75 on some paths
        assert!(apply_local_depolarizing(&rho, 0.75 + 1e-15, 0).is_ok());
    }

    #[test]
    fn global_limits() {
        let rho = DensityMatrix::zero_state(1);
        let out = apply_global_depolarizing(&rho, 1.0).unwrap();
        assert!(close(out.matrix(), DensityMatrix::maximally_mixed(1).matrix(), 1e-15));
        let half = apply_global_depolarizing(&rho, 0.5).unwrap();
        let expected = rho
            .matrix()
            .scale_real(0.5)
            .add(&ComplexMatrix::identity(2).scale_real(0.25))
            .unwrap();
        assert!(close(half.matrix(), &expected, 1e-15));
    }

    #[test]
    fn noise_none_matches_plain_encoding() {
        let cfg = CircuitConfig::iqp(2, 2).unwrap();
        let x = [0.4, 2.2];
        let a = encode_with_noise(&x, &cfg, &NoiseSpec::none(&cfg)).unwrap();
        let b = iqp_encode(&x, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fully_depolarised_encoding() {
        let cfg = CircuitConfig::iqp(2, 1).unwrap();
        let noise = NoiseSpec::local(0.75, &cfg).unwrap();
        let rho = encode_with_noise(&[1.0, 2.5], &cfg, &noise).unwrap();
        assert!(close(rho.matrix(), DensityMatrix::maximally_mixed(2).matrix(), 1e-12));
    }

    #[test]
    fn inconsistent_noise_spec() {
        let cfg = CircuitConfig::iqp(2, 1).unwrap();
        let noise = NoiseSpec::new(NoiseModel::Local, 0.1, 3, 1).unwrap();
        assert!(matches!(
            encode_with_noise(&[0.1, 0.2], &cfg, &noise),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn survival_arithmetic() {
        let spec = |model, p, n, l| NoiseSpec::new(model, p, n, l).unwrap();
        assert_eq!(survival_probability(&spec(NoiseModel::Local, 0.0, 2, 2)), 1.0);
        assert_eq!(survival_probability(&spec(NoiseModel::Global, 0.0, 2, 2)), 1.0);
        assert!((survival_probability(&spec(NoiseModel::Local, 0.1, 2, 1)) - 0.81).abs() < 1e-15);
        assert!((survival_probability(&spec(NoiseModel::Local, 0.1, 2, 2)) - 0.6561).abs() < 1e-15);
        assert!((survival_probability(&spec(NoiseModel::Global, 0.1, 2, 3)) - 0.729).abs() < 1e-15);
    }

    #[test]
    fn equivalent_global_probability() {
        assert_eq!(equivalent_global_p(0.0, 2, 1), 0.0);
        assert!((equivalent_global_p(0.1, 2, 1) - 0.19).abs() < 1e-15);
        for (p, n, l) in [(0.05, 2, 2), (0.3, 3, 1), (0.75, 1, 2)] {
            let local = survival_probability(&NoiseSpec::new(NoiseModel::Local, p, n, l).unwrap());
            let pg = matched_global_layer_p(p, n);
            let global = survival_probability(&NoiseSpec::new(NoiseModel::Global, pg, n, l).unwrap());
            assert!((local - global).abs() < 1e-12);
            assert!((1.0 - equivalent_global_p(p, n, l) - local).abs() < 1e-12);
        }
    }

    #[test]
    fn per_layer_and_end_of_circuit_global_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=3 {
            for l in 1..=3 {
                let cfg = CircuitConfig::iqp(n, l).unwrap();
                for p in [0.0, 0.1, 0.35, 0.8, 1.0] {
                    let x: Vec<f64> = (0..n).map(|_| rand::Rng::random_range(&mut rng, 0.0..std::f64::consts::PI)).collect();
                    let per_layer = encode_with_global_per_layer(&x, &cfg, p).unwrap();
                    let end = encode_with_noise(&x, &cfg, &NoiseSpec::global(p, &cfg).unwrap()).unwrap();
                    assert!(close(per_layer.matrix(), end.matrix(), 1e-12));
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn local_channel_is_cptp(seed in any::<u64>(), n in 1usize..=3, p in 0.0f64..=0.75) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_state(n, &mut rng);
            let out = apply_local_depolarizing(&rho, p, n - 1).unwrap();
            prop_assert!((out.trace() - 1.0).abs() < 1e-12);
            prop_assert!(out.matrix().hermiticity_error() < 1e-12);
            prop_assert!(out.min_eigenvalue().unwrap() >= -1e-9);
            prop_assert!(out.purity() <= rho.purity() + 1e-12);
        }

        #[test]
        fn global_channel_is_cptp(seed in any::<u64>(), n in 1usize..=3, p in 0.0f64..=1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_state(n, &mut rng);
            let out = apply_global_depolarizing(&rho, p).unwrap();
            prop_assert!((out.trace() - 1.0).abs() < 1e-12);
            prop_assert!(out.matrix().hermiticity_error() < 1e-12);
            prop_assert!(out.min_eigenvalue().unwrap() >= -1e-9);
            prop_assert!(out.purity() <= rho.purity() + 1e-12);
        }
    }
}
