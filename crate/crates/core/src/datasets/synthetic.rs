use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::RawDataset;
use crate::error::{Error, Result};

pub const DEFAULT_CENTRES: [[f64; 2]; 2] = [[-4.0, -4.0], [4.0, 4.0]];

/// Two isotropic 2-D Gaussian clusters with the default centres.
pub fn make_gaussian_blobs(n: usize, cluster_std: f64, seed: u64) -> Result<RawDataset> {
    make_gaussian_blobs_with(n, cluster_std, DEFAULT_CENTRES, seed)
}

/// Class `0` is drawn around `centres[0]` and class `1` around
/// `centres[1]`; class 0 takes the extra sample when `n` is odd. Samples
/// are shuffled before returning.
pub fn make_gaussian_blobs_with(
    n: usize,
    cluster_std: f64,
    centres: [[f64; 2]; 2],
    seed: u64,
) -> Result<RawDataset> {
    if n < 2 {
        return Err(Error::Validation(format!("need at least 2 samples, got {n}")));
    }
    if !(cluster_std >= 0.0 && cluster_std.is_finite()) {
        return Err(Error::Validation(format!("cluster std {cluster_std} is invalid")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let n0 = n.div_ceil(2);
    let mut samples: Vec<(Vec<Option<f64>>, String)> = (0..n)
        .map(|i| {
            let class = usize::from(i >= n0);
            let c = centres[class];
            let x: Vec<Option<f64>> = c
                .iter()
                .map(|&ck| Some(ck + cluster_std * noise.sample(&mut rng)))
                .collect();
            (x, class.to_string())
        })
        .collect();
    samples.shuffle(&mut rng);
    let (features, labels) = samples.into_iter().unzip();
    Ok(RawDataset {
        features,
        labels,
        feature_names: vec!["x0".into(), "x1".into()],
        source: format!("gaussian-blobs(n={n}, std={cluster_std}, seed={seed})"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_and_deterministic() {
        let a = make_gaussian_blobs(500, 3.0, 9).unwrap();
        assert_eq!(a.len(), 500);
        assert_eq!(a.labels.iter().filter(|l| *l == "1").count(), 250);
        let b = make_gaussian_blobs(500, 3.0, 9).unwrap();
        assert_eq!(a, b);
        let odd = make_gaussian_blobs(7, 1.0, 1).unwrap();
        let ones = odd.labels.iter().filter(|l| *l == "1").count();
        assert!((7 - 2 * ones as i64).abs() <= 1);
        assert_ne!(a, make_gaussian_blobs(500, 3.0, 10).unwrap());
    }

    #[test]
    fn zero_spread_gives_point_clusters() {
        let d = make_gaussian_blobs(10, 0.0, 4).unwrap();
        for (x, l) in d.features.iter().zip(&d.labels) {
            let c = if l == "0" { -4.0 } else { 4.0 };
            assert_eq!(x, &vec![Some(c), Some(c)]);
        }
    }

    #[test]
    fn too_few_samples() {
        assert!(make_gaussian_blobs(1, 1.0, 0).is_err());
    }
}
