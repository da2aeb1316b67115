//! Scenario results and their on-disk form.
//!
//! Each run writes `<scenario>_<series>.csv` per series (RFC 4180, header
//! row, numbers as `{:.16e}`) and `<scenario>_summary.json`. Nothing
//! time-dependent is written, so equal configs give equal bytes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::CliError;

/// Bumped whenever a CSV header or summary key changes.
pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width for series {}", self.name);
        self.rows.push(row);
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct Record {
    pub scenario: String,
    pub scalars: BTreeMap<String, Value>,
    pub series: Vec<Series>,
    pub checks: Vec<Check>,
}

impl Record {
    pub fn new(scenario: &str) -> Self {
        Self {
            scenario: scenario.to_string(),
            scalars: BTreeMap::new(),
            series: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn scalar(&mut self, key: &str, value: impl Into<Value>) {
        self.scalars.insert(key.to_string(), value.into());
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn csv_name(&self, series: &Series) -> String {
        format!("{}_{}.csv", self.scenario, series.name)
    }

    pub fn summary(&self, config_hash: &str) -> Value {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail }))
            .collect();
        let files: Vec<Value> = self.series.iter().map(|s| Value::from(self.csv_name(s))).collect();
        json!({
            "schema_version": SCHEMA_VERSION,
            "scenario": self.scenario,
            "code_version": env!("CARGO_PKG_VERSION"),
            "config_hash": config_hash,
            "results": self.scalars,
            "series": files,
            "checks": checks,
        })
    }

    /// Writes the requested formats into `dir` and returns the written paths.
    pub fn write(&self, dir: &Path, config_hash: &str, csv: bool, json: bool) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        let mut written = Vec::new();
        if csv {
            for s in &self.series {
                let path = dir.join(self.csv_name(s));
                write_csv(&path, s)?;
                written.push(path);
            }
        }
        if json {
            let path = dir.join(format!("{}_summary.json", self.scenario));
            let mut text = serde_json::to_string_pretty(&self.summary(config_hash)).expect("summary serializes");
            text.push('\n');
            std::fs::write(&path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

fn write_csv(path: &Path, series: &Series) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_path(path).map_err(io)?;
    w.write_record(&series.columns).map_err(io)?;
    for row in &series.rows {
        w.write_record(row.iter().map(|&v| format_number(v))).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}
