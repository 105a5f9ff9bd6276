//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::datasets::{CsvSchema, LabelRule, SplitSpec, SubsetMode};
use crate::error::{Error, Result};
use crate::quantum::{NoiseModel, LOCAL_P_MAX};
use crate::svm::{DEFAULT_MAX_ITER, DEFAULT_TOL};

pub const OUT_ENV: &str = "QKLAB_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Gaussian,
    Heart,
    Wine,
    Cancer,
    Htru2,
    /// Any CSV with an explicit label column and rule.
    Csv,
}

impl DatasetKind {
    fn as_str(&self) -> &'static str {
        match self {
            DatasetKind::Gaussian => "gaussian",
            DatasetKind::Heart => "heart",
            DatasetKind::Wine => "wine",
            DatasetKind::Cancer => "cancer",
            DatasetKind::Htru2 => "htru2",
            DatasetKind::Csv => "csv",
        }
    }
}

impl std::str::FromStr for DatasetKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "gaussian" => DatasetKind::Gaussian,
            "heart" => DatasetKind::Heart,
            "wine" => DatasetKind::Wine,
            "cancer" => DatasetKind::Cancer,
            "htru2" => DatasetKind::Htru2,
            "csv" => DatasetKind::Csv,
            other => return Err(Error::Config(format!("unknown dataset '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetConfig {
    pub kind: DatasetKind,
    pub path: Option<PathBuf>,
    /// Subset size; `None` keeps every sample.
    pub samples: Option<usize>,
    pub subset: SubsetMode,
    /// Cluster spread of the Gaussian generator.
    pub std: f64,
    pub label_column: Option<String>,
    pub label_rule: Option<LabelRule>,
    pub delimiter: Option<u8>,
}

impl DatasetConfig {
    pub fn schema(&self) -> Result<CsvSchema> {
        let mut schema = match self.kind {
            DatasetKind::Csv => CsvSchema::new(self.label_column.as_deref().ok_or_else(|| {
                Error::Config("dataset = csv needs dataset.label_column".into())
            })?),
            kind => CsvSchema::preset(kind.as_str())?,
        };
        if let (Some(col), false) = (&self.label_column, self.kind == DatasetKind::Csv) {
            schema.label_column = col.clone();
        }
        if let Some(d) = self.delimiter {
            schema = schema.with_delimiter(d);
        }
        Ok(schema)
    }

    pub fn rule(&self) -> Result<LabelRule> {
        if let Some(r) = self.label_rule {
            return Ok(r);
        }
        Ok(match self.kind {
            DatasetKind::Gaussian => LabelRule::Binary,
            DatasetKind::Heart => LabelRule::HeartDisease,
            DatasetKind::Wine => LabelRule::WineQuality,
            DatasetKind::Cancer => LabelRule::Cancer,
            DatasetKind::Htru2 => LabelRule::Htru2,
            DatasetKind::Csv => {
                return Err(Error::Config("dataset = csv needs dataset.label_rule".into()))
            }
        })
    }
}

/// Which `C'` the bound sweep uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CPrimeChoice {
    /// Lower end of the feasible range.
    Low,
    /// Midpoint of the feasible range.
    Mid,
    Value(f64),
}

impl std::str::FromStr for CPrimeChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" => Ok(CPrimeChoice::Low),
            "mid" => Ok(CPrimeChoice::Mid),
            v => v
                .parse()
                .map(CPrimeChoice::Value)
                .map_err(|_| Error::Config(format!("bounds.c_prime = '{v}' is not low, mid or a number"))),
        }
    }
}

impl std::fmt::Display for CPrimeChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CPrimeChoice::Low => f.write_str("low"),
            CPrimeChoice::Mid => f.write_str("mid"),
            CPrimeChoice::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub dataset: DatasetConfig,
    pub seed: u64,
    pub n_qubits: usize,
    pub n_layers: usize,
    pub noise_model: NoiseModel,
    pub p_grid: Vec<f64>,
    pub c0: f64,
    pub beta: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Train/validation split of the bound pipeline.
    pub split: SplitSpec,
    pub cv_folds: usize,
    pub fractions: Vec<f64>,
    /// Candidate `C0` values for selection; empty means use `c0`.
    pub c0_grid: Vec<f64>,
    pub c_prime: CPrimeChoice,
    pub output: PathBuf,
}

const KEYS: &[&str] = &[
    "name",
    "dataset",
    "dataset.path",
    "dataset.samples",
    "dataset.subset",
    "dataset.std",
    "dataset.label_column",
    "dataset.label_rule",
    "dataset.delimiter",
    "seed",
    "circuit.qubits",
    "circuit.layers",
    "noise.model",
    "noise.p",
    "svm.c0",
    "svm.beta",
    "svm.tol",
    "svm.max_iter",
    "split",
    "cv.folds",
    "corruption.fractions",
    "selection.c0_grid",
    "bounds.c_prime",
    "output",
];

/// Parses `a:step:b` (inclusive) or a comma list. Grid points are rounded to
/// 12 decimals so `0:0.05:0.75` yields exactly the decimal values.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("cannot parse grid '{s}'"));
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let v: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let (a, step, b) = (v[0], v[1], v[2]);
        if !(step > 0.0) || b < a {
            return Err(bad());
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        return Ok((0..=n)
            .map(|k| ((a + k as f64 * step) * 1e12).round() / 1e12)
            .collect());
    }
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
        .collect()
}

fn render_grid(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn render_split(s: &SplitSpec) -> String {
    match s {
        SplitSpec::Holdout { train_ratio } => train_ratio.to_string(),
        SplitSpec::KFold { k } => format!("kfold:{k}"),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key} = '{v}' is not a valid number")))
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            dataset: DatasetConfig {
                kind: DatasetKind::Gaussian,
                path: None,
                samples: Some(500),
                subset: SubsetMode::Seeded,
                std: 3.0,
                label_column: None,
                label_rule: None,
                delimiter: None,
            },
            seed: 0,
            n_qubits: 2,
            n_layers: 1,
            noise_model: NoiseModel::Local,
            p_grid: parse_grid("0:0.05:0.75").expect("default grid"),
            c0: 1.0,
            beta: 0.0,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            split: SplitSpec::Holdout { train_ratio: 0.75 },
            cv_folds: 5,
            fractions: parse_grid("0:0.1:1").expect("default grid"),
            c0_grid: Vec::new(),
            c_prime: CPrimeChoice::Low,
            output: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    /// Parses config text on top of the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value', got '{line}'", n + 1))
            })?;
            cfg.set(k.trim(), v.trim())
                .map_err(|e| e.context(&format!("line {}", n + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| e.context(&path.display().to_string()))
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{assignment}' is not key=value")))?;
        self.set(k.trim(), v.trim())?;
        self.validate()
    }

    /// Replaces the output directory with `$QKLAB_OUT` when it is set.
    pub fn apply_env(&mut self) {
        if let Some(dir) = std::env::var_os(OUT_ENV).filter(|d| !d.is_empty()) {
            self.output = PathBuf::from(dir);
        }
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let opt = |v: &str| (!v.is_empty() && v != "none").then(|| v.to_string());
        match key {
            "name" => self.name = v.to_string(),
            "dataset" => self.dataset.kind = v.parse()?,
            "dataset.path" => self.dataset.path = opt(v).map(PathBuf::from),
            "dataset.samples" => {
                self.dataset.samples = match opt(v) {
                    None => None,
                    Some(s) if s == "all" => None,
                    Some(s) => Some(parse_num(key, &s)?),
                }
            }
            "dataset.subset" => self.dataset.subset = v.parse()?,
            "dataset.std" => self.dataset.std = parse_num(key, v)?,
            "dataset.label_column" => self.dataset.label_column = opt(v),
            "dataset.label_rule" => self.dataset.label_rule = opt(v).map(|r| r.parse()).transpose()?,
            "dataset.delimiter" => {
                self.dataset.delimiter = match v {
                    "" | "none" => None,
                    "tab" => Some(b'\t'),
                    d if d.len() == 1 => Some(d.as_bytes()[0]),
                    d => return Err(Error::Config(format!("delimiter '{d}' must be one byte"))),
                }
            }
            "seed" => self.seed = parse_num(key, v)?,
            "circuit.qubits" => self.n_qubits = parse_num(key, v)?,
            "circuit.layers" => self.n_layers = parse_num(key, v)?,
            "noise.model" => self.noise_model = v.parse()?,
            "noise.p" => self.p_grid = parse_grid(v)?,
            "svm.c0" => self.c0 = parse_num(key, v)?,
            "svm.beta" => self.beta = parse_num(key, v)?,
            "svm.tol" => self.tol = parse_num(key, v)?,
            "svm.max_iter" => self.max_iter = parse_num(key, v)?,
            "split" => self.split = v.parse()?,
            "cv.folds" => self.cv_folds = parse_num(key, v)?,
            "corruption.fractions" => self.fractions = parse_grid(v)?,
            "selection.c0_grid" => self.c0_grid = parse_grid(v)?,
            "bounds.c_prime" => self.c_prime = v.parse()?,
            "output" => self.output = PathBuf::from(v),
            other => {
                return Err(Error::Config(format!(
                    "unknown key '{other}'; known keys: {}",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if !(self.c0 > 0.0) {
            return fail(format!("svm.c0 = {} must be positive", self.c0));
        }
        if !(self.tol > 0.0) {
            return fail(format!("svm.tol = {} must be positive", self.tol));
        }
        if self.n_qubits == 0 || self.n_layers == 0 {
            return fail("circuit.qubits and circuit.layers must be at least 1".into());
        }
        if self.cv_folds < 2 {
            return fail(format!("cv.folds = {} must be at least 2", self.cv_folds));
        }
        let p_max = match self.noise_model {
            NoiseModel::Global => 1.0,
            _ => LOCAL_P_MAX,
        };
        if let Some(p) = self.p_grid.iter().find(|p| !(0.0..=p_max).contains(*p)) {
            return fail(format!("noise.p value {p} outside [0, {p_max}]"));
        }
        if let Some(f) = self.fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
            return fail(format!("corruption fraction {f} outside [0, 1]"));
        }
        if let Some(c) = self.c0_grid.iter().find(|c| !(**c > 0.0)) {
            return fail(format!("selection.c0_grid value {c} must be positive"));
        }
        if let CPrimeChoice::Value(v) = self.c_prime {
            if !(v >= 0.0) {
                return fail(format!("bounds.c_prime = {v} must be non-negative"));
            }
        }
        if !(self.dataset.std >= 0.0) {
            return fail(format!("dataset.std = {} must be non-negative", self.dataset.std));
        }
        if self.dataset.kind != DatasetKind::Gaussian && self.dataset.path.is_none() {
            return fail(format!(
                "dataset = {} needs dataset.path pointing at the CSV",
                self.dataset.kind.as_str()
            ));
        }
        Ok(())
    }

    /// Every key with its resolved value, in key order.
    pub fn to_pairs(&self) -> BTreeMap<&'static str, String> {
        let d = &self.dataset;
        let none = || "none".to_string();
        let pairs: Vec<(&'static str, String)> = vec![
            ("name", self.name.clone()),
            ("dataset", d.kind.as_str().into()),
            ("dataset.path", d.path.as_ref().map_or_else(none, |p| p.display().to_string())),
            ("dataset.samples", d.samples.map_or_else(|| "all".into(), |n| n.to_string())),
            (
                "dataset.subset",
                match d.subset {
                    SubsetMode::Seeded => "seeded".into(),
                    SubsetMode::First => "first".into(),
                },
            ),
            ("dataset.std", d.std.to_string()),
            ("dataset.label_column", d.label_column.clone().unwrap_or_else(none)),
            (
                "dataset.label_rule",
                d.label_rule.map_or_else(none, |r| {
                    serde_json::to_value(r)
                        .ok()
                        .and_then(|v| v.as_str().map(String::from))
                        .unwrap_or_default()
                }),
            ),
            (
                "dataset.delimiter",
                d.delimiter.map_or_else(none, |b| match b {
                    b'\t' => "tab".into(),
                    b => (b as char).to_string(),
                }),
            ),
            ("seed", self.seed.to_string()),
            ("circuit.qubits", self.n_qubits.to_string()),
            ("circuit.layers", self.n_layers.to_string()),
            ("noise.model", self.noise_model.to_string()),
            ("noise.p", render_grid(&self.p_grid)),
            ("svm.c0", self.c0.to_string()),
            ("svm.beta", self.beta.to_string()),
            ("svm.tol", self.tol.to_string()),
            ("svm.max_iter", self.max_iter.to_string()),
            ("split", render_split(&self.split)),
            ("cv.folds", self.cv_folds.to_string()),
            ("corruption.fractions", render_grid(&self.fractions)),
            ("selection.c0_grid", render_grid(&self.c0_grid)),
            ("bounds.c_prime", self.c_prime.to_string()),
            ("output", self.output.display().to_string()),
        ];
        pairs.into_iter().collect()
    }

    /// Canonical text form; parsing it gives back an equal config.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.to_pairs() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// First 16 hex digits of the SHA-256 of the canonical form, ignoring
    /// the output directory.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.to_pairs().into_iter().filter(|(k, _)| *k != "output") {
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        h.finalize().iter().take(8).fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = parse_grid("0:0.05:0.75").unwrap();
        assert_eq!(g.len(), 16);
        assert_eq!(g[3], 0.15);
        assert_eq!(g[15], 0.75);
        assert_eq!(parse_grid("1, 10,100").unwrap(), vec![1.0, 10.0, 100.0]);
        assert_eq!(parse_grid("0:0.1:1").unwrap().len(), 11);
        assert!(parse_grid("1:0:2").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn parse_and_round_trip() {
        let cfg = ExperimentConfig::parse(
            "# comment\nname = t\nsvm.c0 = 100\ncircuit.layers = 2 # trailing\nsplit = 80/20\nnoise.p = 0, 0.1\n",
        )
        .unwrap();
        assert_eq!(cfg.c0, 100.0);
        assert_eq!(cfg.n_layers, 2);
        assert_eq!(cfg.split, SplitSpec::Holdout { train_ratio: 0.8 });
        let again = ExperimentConfig::parse(&cfg.render()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.hash(), cfg.hash());
    }

    #[test]
    fn hash_tracks_content_not_output() {
        let mut a = ExperimentConfig::default();
        let h = a.hash();
        assert_eq!(h.len(), 16);
        a.output = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), h);
        a.apply_override("seed=9").unwrap();
        assert_ne!(a.hash(), h);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(ExperimentConfig::parse("nope = 1"), Err(Error::Config(_))));
        assert!(ExperimentConfig::parse("svm.c0 = 0").is_err());
        assert!(ExperimentConfig::parse("noise.p = 0.8").is_err());
        assert!(ExperimentConfig::parse("dataset = heart").is_err());
        assert!(ExperimentConfig::parse("just text").is_err());
        assert!(ExperimentConfig::default().apply_override("seed").is_err());
        assert!(ExperimentConfig::parse("noise.model = global\nnoise.p = 0.9").is_ok());
    }

    #[test]
    fn uci_schema_and_rules() {
        let cfg = ExperimentConfig::parse("dataset = wine\ndataset.path = w.csv").unwrap();
        assert_eq!(cfg.dataset.schema().unwrap(), CsvSchema::wine());
        assert_eq!(cfg.dataset.rule().unwrap(), LabelRule::WineQuality);
        let csv = ExperimentConfig::parse(
            "dataset = csv\ndataset.path = x.csv\ndataset.label_column = y\ndataset.label_rule = binary",
        )
        .unwrap();
        assert_eq!(csv.dataset.schema().unwrap().label_column, "y");
        assert_eq!(ExperimentConfig::parse(&csv.render()).unwrap(), csv);
    }
}
