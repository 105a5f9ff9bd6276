use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;

use super::{encode_with_noise, CircuitConfig, DensityMatrix, NoiseSpec};
use crate::error::{Error, Result};
use crate::numerics::RealMatrix;

const IMAG_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-10;
const RANGE_TOL: f64 = 1e-9;

/// Gram matrix of state overlaps.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix(RealMatrix);

impl KernelMatrix {
    /// Checks symmetry and the entry range before wrapping.
    pub fn new(entries: RealMatrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Shape(format!(
                "kernel matrix must be square, got {}x{}",
                entries.rows(),
                entries.cols()
            )));
        }
        let asym = entries.symmetry_error();
        if asym > SYMMETRY_TOL {
            return Err(Error::Invariant(format!(
                "kernel matrix is not symmetric ({asym:.3e})"
            )));
        }
        if let Some(v) = entries
            .as_slice()
            .iter()
            .find(|v| !(**v >= -RANGE_TOL && **v <= 1.0 + RANGE_TOL))
        {
            return Err(Error::Invariant(format!("kernel entry {v} outside [0, 1]")));
        }
        Ok(Self(entries))
    }

    pub fn size(&self) -> usize {
        self.0.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &RealMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> RealMatrix {
        self.0
    }

    /// Principal sub-matrix on `idx`.
    pub fn select(&self, idx: &[usize]) -> Self {
        Self(self.0.select(idx, idx))
    }

    /// Rows `rows`, columns `cols`; used for test-versus-train kernels.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> RealMatrix {
        self.0.select(rows, cols)
    }

    /// Writes the `m=<size>` header then one comma-separated row per line
    /// with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let m = self.size();
        writeln!(w, "m={m}")?;
        for i in 0..m {
            let row: Vec<String> = (0..m).map(|j| format!("{:.16e}", self.0[(i, j)])).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(f);
        self.write_csv(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv<R: std::io::Read>(r: R, origin: &Path) -> Result<Self> {
        let malformed = |row: usize, message: String| Error::MalformedRow {
            path: origin.to_path_buf(),
            row,
            message,
        };
        let mut lines = BufReader::new(r).lines();
        let header = lines
            .next()
            .ok_or_else(|| malformed(0, "missing header".into()))?
            .map_err(|e| Error::io(origin, e))?;
        let m: usize = header
            .trim()
            .strip_prefix("m=")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| malformed(0, format!("bad header '{header}'")))?;
        let mut data = Vec::with_capacity(m * m);
        for row in 1..=m {
            let line = lines
                .next()
                .ok_or_else(|| malformed(row, "missing row".into()))?
                .map_err(|e| Error::io(origin, e))?;
            let before = data.len();
            for tok in line.split(',') {
                let v: f64 = tok
                    .trim()
                    .parse()
                    .map_err(|_| malformed(row, format!("bad number '{tok}'")))?;
                data.push(v);
            }
            if data.len() - before != m {
                return Err(malformed(
                    row,
                    format!("expected {m} entries, got {}", data.len() - before),
                ));
            }
        }
        Self::new(RealMatrix::from_vec(m, m, data)?)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(f, path)
    }
}

/// `Re Tr(rho_i rho_j)`.
pub fn kernel_element(rho_i: &DensityMatrix, rho_j: &DensityMatrix) -> Result<f64> {
    if rho_i.n_qubits() != rho_j.n_qubits() {
        return Err(Error::Shape(format!(
            "kernel between {}-qubit and {}-qubit states",
            rho_i.n_qubits(),
            rho_j.n_qubits()
        )));
    }
    let t = rho_i.matrix().trace_of_product(rho_j.matrix())?;
    if t.im.abs() > IMAG_TOL {
        return Err(Error::Validation(format!(
            "overlap has imaginary part {:.3e}",
            t.im
        )));
    }
    Ok(t.re)
}

pub fn encode_all(
    samples: &[Vec<f64>],
    config: &CircuitConfig,
    noise: &NoiseSpec,
) -> Result<Vec<DensityMatrix>> {
    samples
        .par_iter()
        .map(|x| encode_with_noise(x, config, noise))
        .collect()
}

/// Gram matrix of already encoded states. Only the upper triangle is
/// evaluated; the lower one is its mirror.
pub fn kernel_from_states(states: &[DensityMatrix]) -> Result<KernelMatrix> {
    let m = states.len();
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            (i..m)
                .map(|j| kernel_element(&states[i], &states[j]))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut k = RealMatrix::zeros(m, m);
    for (i, row) in rows.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            k[(i, i + off)] = v;
            k[(i + off, i)] = v;
        }
    }
    KernelMatrix::new(k)
}

pub fn kernel_matrix(
    samples: &[Vec<f64>],
    config: &CircuitConfig,
    noise: &NoiseSpec,
) -> Result<KernelMatrix> {
    kernel_from_states(&encode_all(samples, config, noise)?)
}

/// Rectangular kernel `K[a, b] = Tr(rho_a rho_b)` between two state sets.
pub fn cross_kernel(left: &[DensityMatrix], right: &[DensityMatrix]) -> Result<RealMatrix> {
    let rows: Vec<Vec<f64>> = left
        .par_iter()
        .map(|a| right.iter().map(|b| kernel_element(a, b)).collect())
        .collect::<Result<_>>()?;
    let data = rows.into_iter().flatten().collect();
    RealMatrix::from_vec(left.len(), right.len(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Complex64;
    use crate::quantum::{iqp_encode, NoiseModel};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_samples(m: usize, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        (0..m)
            .map(|_| (0..n).map(|_| rng.random_range(0.0..std::f64::consts::PI)).collect())
            .collect()
    }

    #[test]
    fn elementary_overlaps() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let a = DensityMatrix::from_pure(&[one, zero]).unwrap();
        let b = DensityMatrix::from_pure(&[zero, one]).unwrap();
        assert_eq!(kernel_element(&a, &a).unwrap(), 1.0);
        assert_eq!(kernel_element(&a, &b).unwrap(), 0.0);
        let mixed = DensityMatrix::maximally_mixed(1);
        assert!((kernel_element(&mixed, &mixed).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            kernel_element(&a, &DensityMatrix::zero_state(2)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn self_overlap_of_encoding() {
        let cfg = CircuitConfig::iqp(3, 2).unwrap();
        let rho = iqp_encode(&[0.3, 1.9, 2.7], &cfg).unwrap();
        assert!((kernel_element(&rho, &rho).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noiseless_matrix_has_unit_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cfg = CircuitConfig::iqp(2, 2).unwrap();
        let k = kernel_matrix(&random_samples(12, 2, &mut rng), &cfg, &NoiseSpec::none(&cfg)).unwrap();
        for i in 0..k.size() {
            assert!((k.get(i, i) - 1.0).abs() < 1e-12);
        }
        assert_eq!(k.as_matrix().symmetry_error(), 0.0);
    }

    #[test]
    fn fully_depolarised_matrix_is_flat() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in 1..=3 {
            let cfg = CircuitConfig::iqp(n, 1).unwrap();
            let noise = NoiseSpec::local(0.75, &cfg).unwrap();
            let k = kernel_matrix(&random_samples(6, n, &mut rng), &cfg, &noise).unwrap();
            let flat = 1.0 / (1 << n) as f64;
            assert!(k.as_matrix().as_slice().iter().all(|v| (v - flat).abs() < 1e-12));
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let cfg = CircuitConfig::iqp(2, 1).unwrap();
        let noise = NoiseSpec::local(0.1, &cfg).unwrap();
        let k = kernel_matrix(&random_samples(5, 2, &mut rng), &cfg, &noise).unwrap();
        let mut buf = Vec::new();
        k.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("m=5\n"));
        let back = KernelMatrix::read_csv(&buf[..], Path::new("mem")).unwrap();
        assert_eq!(back, k);
    }

    #[test]
    fn malformed_csv() {
        let bad = b"m=2\n1,0\n0\n";
        assert!(matches!(
            KernelMatrix::read_csv(&bad[..], Path::new("mem")),
            Err(Error::MalformedRow { row: 2, .. })
        ));
        assert!(KernelMatrix::read_csv(&b"2\n"[..], Path::new("mem")).is_err());
    }

    #[test]
    fn cross_kernel_matches_square_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let cfg = CircuitConfig::iqp(2, 1).unwrap();
        let noise = NoiseSpec::local(0.2, &cfg).unwrap();
        let states = encode_all(&random_samples(6, 2, &mut rng), &cfg, &noise).unwrap();
        let k = kernel_from_states(&states).unwrap();
        let c = cross_kernel(&states[..2], &states).unwrap();
        assert_eq!(c, k.block(&[0, 1], &[0, 1, 2, 3, 4, 5]));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn noisy_kernel_obeys_decay_bound(seed in any::<u64>(), n in 1usize..=3, l in 1usize..=2) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cfg = CircuitConfig::iqp(n, l).unwrap();
            let samples = random_samples(5, n, &mut rng);
            let clean = kernel_matrix(&samples, &cfg, &NoiseSpec::none(&cfg)).unwrap();
            for step in 0..=15 {
                let p = step as f64 / 20.0;
                let noise = NoiseSpec::new(NoiseModel::Local, p, n, l).unwrap();
                let noisy = kernel_matrix(&samples, &cfg, &noise).unwrap();
                let c = (1.0 - p).powi((2 * l * n) as i32);
                for i in 0..5 {
                    for j in 0..5 {
                        prop_assert!(noisy.get(i, j) <= c * clean.get(i, j) + (1.0 - c) + 1e-9);
                    }
                }
            }
        }
    }
}
