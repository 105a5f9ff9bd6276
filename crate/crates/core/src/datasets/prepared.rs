use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pca::{pca_scale, PcaTransform};
use super::raw::{binarize_labels, impute_median, LabelRule, RawDataset};
use crate::error::{Error, Result};
use crate::svm::LabeledSet;

const RANGE_TOL: f64 = 1e-12;

/// How a subset of `n` samples is drawn from a larger source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubsetMode {
    Seeded,
    First,
}

impl std::str::FromStr for SubsetMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "seeded" => Ok(SubsetMode::Seeded),
            "first" => Ok(SubsetMode::First),
            other => Err(Error::Config(format!("unknown subset mode '{other}'"))),
        }
    }
}

/// Indices of an `n`-sample subset of `m`, sorted. `n >= m` keeps everything.
pub fn subsample(m: usize, n: usize, mode: SubsetMode, seed: u64) -> Vec<usize> {
    if n >= m {
        return (0..m).collect();
    }
    match mode {
        SubsetMode::First => (0..n).collect(),
        SubsetMode::Seeded => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx = index::sample(&mut rng, m, n).into_vec();
            idx.sort_unstable();
            idx
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub seed: u64,
    pub label_rule: LabelRule,
    pub subset: Option<(usize, SubsetMode)>,
    pub imputed_values: usize,
    pub transform: PcaTransform,
}

/// Encoder-ready data: `N` columns in `[0, pi]` and `+-1` labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedDataset {
    pub features: Vec<Vec<f64>>,
    pub labels: LabeledSet,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrepareOptions {
    pub n_components: usize,
    pub label_rule: LabelRule,
    pub subset: Option<(usize, SubsetMode)>,
    pub seed: u64,
}

impl PreparedDataset {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.provenance.transform.n_components()
    }

    /// Every column lies in `[0, pi]` within 1e-12 and the width is `N`.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_features();
        if self.labels.len() != self.features.len() {
            return Err(Error::Invariant(format!(
                "{} feature rows but {} labels",
                self.features.len(),
                self.labels.len()
            )));
        }
        for (i, row) in self.features.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Invariant(format!("row {i} has {} columns, expected {n}", row.len())));
            }
            if let Some((k, v)) = row
                .iter()
                .enumerate()
                .find(|(_, v)| !(**v >= -RANGE_TOL && **v <= PI + RANGE_TOL))
            {
                return Err(Error::Invariant(format!("feature ({i}, {k}) = {v} outside [0, pi]")));
            }
        }
        Ok(())
    }

    pub fn select(&self, idx: &[usize]) -> (Vec<Vec<f64>>, LabeledSet) {
        (
            idx.iter().map(|&i| self.features[i].clone()).collect(),
            self.labels.select(idx),
        )
    }

    /// Writes `f0..f{N-1},label` rows and a `<path>.json` provenance sidecar.
    pub fn save(&self, path: &Path) -> Result<PathBuf> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e.into()))?;
        let mut header: Vec<String> = (0..self.n_features()).map(|k| format!("f{k}")).collect();
        header.push("label".into());
        w.write_record(&header)?;
        for (row, y) in self.features.iter().zip(self.labels.as_slice()) {
            let mut rec: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            rec.push(format!("{y}"));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        let sidecar = path.with_extension("json");
        let mut f = std::fs::File::create(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
        serde_json::to_writer_pretty(&mut f, &self.provenance)?;
        f.write_all(b"\n").map_err(|e| Error::io(&sidecar, e))?;
        Ok(sidecar)
    }
}

/// Subset, impute, binarise and project a raw dataset. PCA is fitted on
/// every retained sample.
pub fn prepare(raw: &RawDataset, opts: &PrepareOptions) -> Result<PreparedDataset> {
    let raw = match opts.subset {
        Some((n, mode)) => raw.select(&subsample(raw.len(), n, mode, opts.seed)),
        None => raw.clone(),
    };
    let imputed_values = raw.missing_count();
    let raw = if imputed_values > 0 { impute_median(&raw)? } else { raw };
    let labels = binarize_labels(&raw, opts.label_rule)?;
    let (features, transform) = pca_scale(&raw.complete_features()?, opts.n_components)?;
    let prepared = PreparedDataset {
        features,
        labels,
        provenance: Provenance {
            source: raw.source.clone(),
            seed: opts.seed,
            label_rule: opts.label_rule,
            subset: opts.subset,
            imputed_values,
            transform,
        },
    };
    prepared.validate()?;
    Ok(prepared)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::synthetic::make_gaussian_blobs;
    use proptest::prelude::*;

    fn opts(n: usize) -> PrepareOptions {
        PrepareOptions {
            n_components: n,
            label_rule: LabelRule::Binary,
            subset: None,
            seed: 3,
        }
    }

    #[test]
    fn gaussian_pipeline() {
        let raw = make_gaussian_blobs(500, 3.0, 1).unwrap();
        let d = prepare(&raw, &opts(2)).unwrap();
        assert_eq!(d.len(), 500);
        assert_eq!(d.labels.positives(), 250);
        assert_eq!(d.n_features(), 2);
    }

    #[test]
    fn subsets() {
        assert_eq!(subsample(10, 3, SubsetMode::First, 0), vec![0, 1, 2]);
        let s = subsample(100, 20, SubsetMode::Seeded, 5);
        assert_eq!(s.len(), 20);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(s, subsample(100, 20, SubsetMode::Seeded, 5));
        assert_eq!(subsample(4, 9, SubsetMode::Seeded, 5), vec![0, 1, 2, 3]);
    }

    #[test]
    fn imputes_before_projection() {
        let mut raw = make_gaussian_blobs(20, 1.0, 2).unwrap();
        raw.features[3][1] = None;
        let d = prepare(&raw, &opts(1)).unwrap();
        assert_eq!(d.provenance.imputed_values, 1);
    }

    #[test]
    fn save_writes_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let d = prepare(&make_gaussian_blobs(12, 1.0, 2).unwrap(), &opts(2)).unwrap();
        let path = dir.path().join("prep.csv");
        let sidecar = d.save(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 13);
        assert!(text.starts_with("f0,f1,label\n"));
        let prov: Provenance = serde_json::from_reader(std::fs::File::open(sidecar).unwrap()).unwrap();
        assert_eq!(prov, d.provenance);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn range_invariant_holds(n in 4usize..80, std in 0.1f64..5.0, seed in any::<u64>(), k in 1usize..=2) {
            let d = prepare(&make_gaussian_blobs(n, std, seed).unwrap(), &opts(k)).unwrap();
            for col in 0..k {
                prop_assert!(d.features.iter().all(|r| (0.0..=PI).contains(&r[col])));
            }
        }

        #[test]
        fn generator_is_deterministic(n in 2usize..60, seed in any::<u64>()) {
            let a = make_gaussian_blobs(n, 3.0, seed).unwrap();
            let b = make_gaussian_blobs(n, 3.0, seed).unwrap();
            let bits = |d: &RawDataset| d.features.iter().flatten().map(|v| v.unwrap().to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&a), bits(&b));
        }
    }
}
