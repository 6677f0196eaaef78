//! `report.json`, CSV tables and the separate timing record.
//!
//! `report.json` holds only values that are pure functions of the config
//! and seed, so identical runs reproduce it byte for byte. Wall-clock data
//! goes to `timing.json`.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Scenario};

pub const REPORT_SCHEMA: &str = "heisenfft-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `value ≤ limit`.
    AtMost,
    /// `value ≥ limit`.
    AtLeast,
    /// Boolean check; `value` is 1 or 0.
    Holds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub value: Option<f64>,
    pub limit: Option<f64>,
    pub relation: Relation,
    pub passed: bool,
}

impl Check {
    /// Passes iff `value ≤ limit`; NaN fails.
    pub fn at_most(id: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { id: id.into(), value: Some(value), limit: Some(limit), relation: Relation::AtMost, passed: value <= limit }
    }

    pub fn at_least(id: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { id: id.into(), value: Some(value), limit: Some(limit), relation: Relation::AtLeast, passed: value >= limit }
    }

    pub fn holds(id: impl Into<String>, ok: bool) -> Self {
        Self { id: id.into(), value: Some(if ok { 1.0 } else { 0.0 }), limit: None, relation: Relation::Holds, passed: ok }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub scenario: Scenario,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Scalar results by name, sorted.
    pub values: BTreeMap<String, f64>,
    /// Files written next to the report, sorted.
    pub artifacts: Vec<String>,
    pub config: ExperimentConfig,
}

impl Report {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            schema: REPORT_SCHEMA.into(),
            scenario: config.scenario,
            seed: config.seed,
            passed: true,
            checks: Vec::new(),
            values: BTreeMap::new(),
            artifacts: Vec::new(),
            config: config.clone(),
        }
    }

    pub fn check(&mut self, check: Check) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    pub fn value(&mut self, name: impl Into<String>, v: f64) {
        self.values.insert(name.into(), v);
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn find(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Numeric table written as RFC 4180 CSV with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn write(&self, dir: &Path) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_path(dir.join(self.file_name()))?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            // `{}` on f64 is the shortest round-trip form with a '.' separator.
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Wall-clock record kept out of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub elapsed_ms: u128,
}

impl Timing {
    pub fn write(&self, dir: &Path) -> io::Result<()> {
        fs::write(dir.join("timing.json"), serde_json::to_string_pretty(self).expect("timing serializes") + "\n")
    }
}
