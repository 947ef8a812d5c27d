use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

/// How a measured value is compared with its bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Criterion {
    /// value ≤ bound
    AtMost { bound: f64 },
    /// value ≥ bound
    AtLeast { bound: f64 },
    /// |value − target| ≤ tolerance
    Within { target: f64, tolerance: f64 },
    /// |value − target| ≤ tolerance·|target|
    Relative { target: f64, tolerance: f64 },
}

impl Criterion {
    pub fn holds(&self, value: f64) -> bool {
        match *self {
            Criterion::AtMost { bound } => value <= bound,
            Criterion::AtLeast { bound } => value >= bound,
            Criterion::Within { target, tolerance } => (value - target).abs() <= tolerance,
            Criterion::Relative { target, tolerance } => (value - target).abs() <= tolerance * target.abs(),
        }
    }
}

/// One tested number together with the criterion it was tested against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub criterion: Criterion,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, criterion: Criterion) -> Self {
        Self { name: name.into(), value, passed: criterion.holds(value), criterion }
    }
}

/// Machine-readable outcome of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: Value,
    pub checks: Vec<Check>,
    /// Tables and auxiliary measurements keyed by name.
    pub data: BTreeMap<String, Value>,
    /// The run is trivially satisfied (e.g. f ≡ 0).
    pub trivial: bool,
    /// CSV tables written next to the JSON report, keyed by file name.
    #[serde(skip)]
    pub tables: BTreeMap<String, String>,
}

impl ExperimentReport {
    pub fn new(experiment: impl Into<String>, config: Value) -> Self {
        Self { experiment: experiment.into(), config, checks: Vec::new(), data: BTreeMap::new(), trivial: false, tables: BTreeMap::new() }
    }

    pub fn check(&mut self, name: impl Into<String>, value: f64, criterion: Criterion) -> bool {
        let c = Check::new(name, value, criterion);
        let ok = c.passed;
        self.checks.push(c);
        ok
    }

    pub fn record(&mut self, key: impl Into<String>, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.data.insert(key.into(), v);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Out<'a> {
            #[serde(flatten)]
            report: &'a ExperimentReport,
            passed: bool,
        }
        serde_json::to_string_pretty(&Out { report: self, passed: self.passed() })
            .map(|s| s + "\n")
            .map_err(|e| Error::Format(e.to_string()))
    }

    pub fn attach_table(&mut self, file_name: impl Into<String>, csv: String) {
        self.tables.insert(file_name.into(), csv);
    }

    /// Writes `<experiment>.json` and every attached table into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.write_json(&dir.join(format!("{}.json", self.experiment)))?;
        for (name, text) in &self.tables {
            std::fs::write(dir.join(name), text)?;
        }
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}
