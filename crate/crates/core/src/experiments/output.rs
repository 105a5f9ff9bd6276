use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::ExperimentConfig;
use crate::error::{Error, Result};

/// Shortest round-trip form, exponent notation outside `[1e-4, 1e16)`;
/// `NaN` and infinities spelled out.
pub(crate) fn num(v: f64) -> String {
    if v.is_finite() {
        let a = v.abs();
        if a != 0.0 && !(1e-4..1e16).contains(&a) {
            format!("{v:e}")
        } else {
            v.to_string()
        }
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub(crate) fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// One CSV file: a header and rows already rendered to strings.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file_name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file_name: &str, header: &[&str]) -> Self {
        Self {
            file_name: file_name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "{}", self.file_name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j].as_str()).collect())
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner()
            .map_err(|e| Error::Invariant(format!("csv buffer: {e}")))
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(&self.file_name);
        std::fs::write(&path, self.to_csv_bytes()?).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub outputs: Vec<String>,
    pub summary: serde_json::Value,
}

pub(crate) fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Tables plus the record describing the run that made them.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub record: RunRecord,
    pub tables: Vec<Table>,
}

impl RunOutput {
    pub(crate) fn new(
        command: &str,
        cfg: &ExperimentConfig,
        started_unix: u64,
        tables: Vec<Table>,
        summary: serde_json::Value,
    ) -> Self {
        Self {
            record: RunRecord {
                command: command.to_string(),
                experiment: cfg.name.clone(),
                config_hash: cfg.hash(),
                seed: cfg.seed,
                config: cfg
                    .to_pairs()
                    .into_iter()
                    .map(|(k, v)| (k.to_string(), v))
                    .collect(),
                started_unix,
                finished_unix: unix_now(),
                outputs: tables.iter().map(|t| t.file_name.clone()).collect(),
                summary,
            },
            tables,
        }
    }

    pub fn summary_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.record.summary).unwrap_or_default()
    }

    pub fn table(&self, file_name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.file_name == file_name)
    }

    /// Writes every table and `<command>_record.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut paths = self
            .tables
            .iter()
            .map(|t| t.write(dir))
            .collect::<Result<Vec<_>>>()?;
        let rec = dir.join(format!("{}_record.json", self.record.command.replace('-', "_")));
        let mut text = serde_json::to_string_pretty(&self.record)?;
        text.push('\n');
        std::fs::write(&rec, text).map_err(|e| Error::io(&rec, e))?;
        paths.push(rec);
        Ok(paths)
    }
}
