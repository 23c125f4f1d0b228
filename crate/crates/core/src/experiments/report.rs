//! `wn-report/1`: machine-readable check records and plot series.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::Config;
use crate::error::{Error, Result};

pub const REPORT_SCHEMA: &str = "wn-report/1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub theorem: &'static str,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckRecord {
    /// `pass` is recomputed from the two numbers; a NaN statistic fails.
    pub fn new(name: impl Into<String>, theorem: &'static str, statistic: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            theorem,
            statistic,
            threshold,
            pass: statistic <= threshold,
        }
    }
}

/// Columns of numbers written as CSV next to the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |e: csv::Error| Error::InvalidParameter(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))
    }
}

/// Result of one command before it is stamped into a [`Report`].
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub checks: Vec<CheckRecord>,
    pub series: Option<Series>,
    /// Extra machine-readable payload (coefficients, tables).
    pub data: Option<serde_json::Value>,
}

impl Outcome {
    pub fn check(&mut self, name: impl Into<String>, theorem: &'static str, statistic: f64, threshold: f64) {
        self.checks.push(CheckRecord::new(name, theorem, statistic, threshold));
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&CheckRecord> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub format: &'static str,
    pub command: String,
    pub config: Config,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series_file: Option<String>,
    pub wall_time_s: f64,
}

/// `report.json` → `report.csv`.
pub fn series_path(out: &Path) -> PathBuf {
    out.with_extension("csv")
}

impl Report {
    pub fn new(command: &str, config: Config, outcome: &Outcome, wall_time_s: f64, out: &Path) -> Self {
        let series_file = outcome.series.as_ref().map(|_| {
            series_path(out)
                .file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_default()
        });
        Self {
            format: REPORT_SCHEMA,
            command: command.into(),
            config,
            pass: outcome.all_pass(),
            checks: outcome.checks.clone(),
            data: outcome.data.clone(),
            series_file,
            wall_time_s,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
