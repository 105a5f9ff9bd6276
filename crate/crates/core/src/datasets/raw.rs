use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::summary_stats;
use crate::svm::LabeledSet;

/// Tabular data as ingested: features may be missing until imputed, labels
/// keep their source spelling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawDataset {
    pub features: Vec<Vec<Option<f64>>>,
    pub labels: Vec<String>,
    pub feature_names: Vec<String>,
    pub source: String,
}

impl RawDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn missing_count(&self) -> usize {
        self.features.iter().flatten().filter(|v| v.is_none()).count()
    }

    /// Dense feature rows; fails if anything is still missing.
    pub fn complete_features(&self) -> Result<Vec<Vec<f64>>> {
        self.features
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        v.ok_or_else(|| {
                            Error::Validation(format!(
                                "sample {i}, feature '{}' is missing; impute first",
                                self.feature_names[j]
                            ))
                        })
                    })
                    .collect()
            })
            .collect()
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        Self {
            features: idx.iter().map(|&i| self.features[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i].clone()).collect(),
            feature_names: self.feature_names.clone(),
            source: self.source.clone(),
        }
    }
}

/// Column layout of a CSV file with a header row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub label_column: String,
    pub delimiter: u8,
    /// Columns that are neither features nor the label.
    pub drop_columns: Vec<String>,
    pub missing_tokens: Vec<String>,
}

impl CsvSchema {
    pub fn new(label_column: &str) -> Self {
        Self {
            label_column: label_column.to_string(),
            delimiter: b',',
            drop_columns: Vec::new(),
            missing_tokens: vec![String::new(), "?".to_string()],
        }
    }

    pub fn with_delimiter(mut self, delimiter: u8) -> Self {
        self.delimiter = delimiter;
        self
    }

    pub fn dropping(mut self, columns: &[&str]) -> Self {
        self.drop_columns = columns.iter().map(|c| c.to_string()).collect();
        self
    }

    /// White wine quality file as distributed (semicolon separated).
    pub fn wine() -> Self {
        Self::new("quality").with_delimiter(b';')
    }

    pub fn heart() -> Self {
        Self::new("num")
    }

    pub fn cancer() -> Self {
        Self::new("diagnosis").dropping(&["id"])
    }

    pub fn htru2() -> Self {
        Self::new("class")
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "wine" => Ok(Self::wine()),
            "heart" => Ok(Self::heart()),
            "cancer" => Ok(Self::cancer()),
            "htru2" => Ok(Self::htru2()),
            other => Err(Error::Config(format!("no CSV schema named '{other}'"))),
        }
    }
}

pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<RawDataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, path, schema)
}

pub fn read_csv<R: std::io::Read>(reader: R, origin: &Path, schema: &CsvSchema) -> Result<RawDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim_matches('"').to_string())
        .collect();
    let label_idx = header
        .iter()
        .position(|h| *h == schema.label_column)
        .ok_or_else(|| {
            Error::Config(format!(
                "{}: no label column '{}' in header {:?}",
                origin.display(),
                schema.label_column,
                header
            ))
        })?;
    let feature_idx: Vec<usize> = (0..header.len())
        .filter(|&i| i != label_idx && !schema.drop_columns.contains(&header[i]))
        .collect();

    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        // data rows are numbered from 1, the header being row 0
        let row = r + 1;
        let rec = rec.map_err(|e| Error::MalformedRow {
            path: origin.to_path_buf(),
            row,
            message: e.to_string(),
        })?;
        if rec.len() != header.len() {
            return Err(Error::MalformedRow {
                path: origin.to_path_buf(),
                row,
                message: format!("{} fields, header has {}", rec.len(), header.len()),
            });
        }
        let mut values = Vec::with_capacity(feature_idx.len());
        for &j in &feature_idx {
            let tok = &rec[j];
            if schema.missing_tokens.iter().any(|m| m == tok) {
                values.push(None);
                continue;
            }
            let v: f64 = tok.parse().map_err(|_| Error::MalformedRow {
                path: origin.to_path_buf(),
                row,
                message: format!("column '{}' has non-numeric value '{tok}'", header[j]),
            })?;
            if !v.is_finite() {
                return Err(Error::MalformedRow {
                    path: origin.to_path_buf(),
                    row,
                    message: format!("column '{}' is not finite", header[j]),
                });
            }
            values.push(Some(v));
        }
        features.push(values);
        labels.push(rec[label_idx].to_string());
    }
    if labels.is_empty() {
        return Err(Error::EmptyDataset(origin.display().to_string()));
    }
    Ok(RawDataset {
        features,
        labels,
        feature_names: feature_idx.iter().map(|&j| header[j].clone()).collect(),
        source: origin.display().to_string(),
    })
}

/// Mapping from source labels to `+1` / `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelRule {
    /// Quality above 5 is premium (+1).
    WineQuality,
    /// Any score above 0 indicates disease (+1).
    HeartDisease,
    /// `M` malignant (+1), `B` benign (-1).
    Cancer,
    /// `1` pulsar (+1), `0` otherwise.
    Htru2,
    /// `1` / `0` classes of generated data.
    Binary,
}

impl std::str::FromStr for LabelRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wine" | "wine-quality" => Ok(LabelRule::WineQuality),
            "heart" | "heart-disease" => Ok(LabelRule::HeartDisease),
            "cancer" => Ok(LabelRule::Cancer),
            "htru2" => Ok(LabelRule::Htru2),
            "binary" => Ok(LabelRule::Binary),
            other => Err(Error::Config(format!("unknown label rule '{other}'"))),
        }
    }
}

fn numeric_label(raw: &str, i: usize) -> Result<f64> {
    raw.trim().parse::<f64>().map_err(|_| {
        Error::Validation(format!("label {i} = '{raw}' is not numeric"))
    })
}

pub fn binarize_labels(raw: &RawDataset, rule: LabelRule) -> Result<LabeledSet> {
    let out: Result<Vec<f64>> = raw
        .labels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let bad = || Error::Validation(format!("label {i} = '{l}' outside the {rule:?} domain"));
            match rule {
                LabelRule::WineQuality => {
                    Ok(if numeric_label(l, i)? > 5.0 { 1.0 } else { -1.0 })
                }
                LabelRule::HeartDisease => {
                    let v = numeric_label(l, i)?;
                    if v < 0.0 {
                        return Err(bad());
                    }
                    Ok(if v > 0.0 { 1.0 } else { -1.0 })
                }
                LabelRule::Cancer => match l.trim() {
                    "M" => Ok(1.0),
                    "B" => Ok(-1.0),
                    _ => Err(bad()),
                },
                LabelRule::Htru2 | LabelRule::Binary => match numeric_label(l, i)? {
                    1.0 => Ok(1.0),
                    0.0 => Ok(-1.0),
                    _ => Err(bad()),
                },
            }
        })
        .collect();
    LabeledSet::new(out?)
}

/// Replaces each missing entry by the median of the present values in its
/// column.
pub fn impute_median(raw: &RawDataset) -> Result<RawDataset> {
    let d = raw.n_features();
    let mut medians = Vec::with_capacity(d);
    for j in 0..d {
        let present: Vec<f64> = raw.features.iter().filter_map(|row| row[j]).collect();
        if present.is_empty() {
            return Err(Error::Validation(format!(
                "feature '{}' has no values to impute from",
                raw.feature_names[j]
            )));
        }
        medians.push(summary_stats(&present)?.median);
    }
    let mut out = raw.clone();
    for row in &mut out.features {
        for (v, &med) in row.iter_mut().zip(&medians) {
            if v.is_none() {
                *v = Some(med);
            }
        }
    }
    Ok(out)
}
