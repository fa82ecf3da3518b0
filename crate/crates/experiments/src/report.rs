//! Report model, acceptance predicates and deterministic emission.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{CheckSpec, ExperimentConfig, Rule};
use crate::error::{ExpError, ExpResult};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub series: String,
    pub rule: Rule,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub kind: String,
    pub config_hash: String,
    pub seed: u64,
    pub series: BTreeMap<String, Vec<f64>>,
    pub scalars: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub checks: Vec<CheckOutcome>,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(cfg: &ExperimentConfig) -> ExpResult<Self> {
        Ok(Self {
            kind: cfg.kind.name().to_string(),
            config_hash: cfg.hash()?,
            seed: cfg.seed,
            series: BTreeMap::new(),
            scalars: BTreeMap::new(),
            notes: Vec::new(),
            checks: Vec::new(),
            tables: Vec::new(),
        })
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.series.get(name).map(Vec::as_slice)
    }

    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.scalars.get(name).copied()
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Exposes every column of `table` except `skip` as a series.
    pub fn series_from_table(&mut self, table: &Table, skip: &[&str]) {
        for name in &table.columns {
            if !skip.contains(&name.as_str()) {
                self.series.insert(name.clone(), table.column(name).unwrap_or_default());
            }
        }
    }

    pub fn evaluate(&mut self, checks: &[CheckSpec]) {
        self.checks = checks.iter().map(|c| evaluate_check(self, c)).collect();
    }

    pub fn all_checks_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn evaluate_check(report: &Report, check: &CheckSpec) -> CheckOutcome {
    let outcome = |passed: bool, detail: String| CheckOutcome {
        series: check.series.clone(),
        rule: check.rule,
        passed,
        detail,
    };
    let Some(values) = report.series(&check.series).or_else(|| {
        report
            .scalars
            .get(&check.series)
            .map(std::slice::from_ref)
    }) else {
        return outcome(false, format!("no series named {}", check.series));
    };
    if values.is_empty() {
        return outcome(false, "empty series".into());
    }
    let value = check.value.unwrap_or(f64::NAN);
    let first = values[0];
    let last = values[values.len() - 1];
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    match check.rule {
        Rule::Decreasing => outcome(values.windows(2).all(|p| p[1] < p[0]), format!("{values:?}")),
        Rule::NonIncreasing => outcome(values.windows(2).all(|p| p[1] <= p[0]), format!("{values:?}")),
        Rule::LastOverFirstAtMost => outcome(last <= value * first, format!("last/first = {:.4e} (limit {value})", last / first)),
        Rule::MinOverMaxAtLeast => outcome(min >= value * max, format!("min/max = {:.4e} (limit {value})", min / max)),
        Rule::AtMost => outcome(max <= value, format!("max = {max:.4e} (limit {value})")),
        Rule::AtLeast => outcome(min >= value, format!("min = {min:.4e} (limit {value})")),
        Rule::Within => {
            let lo = check.lower.unwrap_or(f64::NAN);
            let hi = check.upper.unwrap_or(f64::NAN);
            outcome(min >= lo && max <= hi, format!("range [{min:.4}, {max:.4}] (allowed [{lo}, {hi}])"))
        }
    }
}

fn ensure_finite(report: &Report) -> ExpResult<()> {
    for (name, vals) in &report.series {
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(ExpError::NonFinite(format!("series {name}")));
        }
    }
    for (name, v) in &report.scalars {
        if !v.is_finite() {
            return Err(ExpError::NonFinite(format!("scalar {name}")));
        }
    }
    for t in &report.tables {
        if t.rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(ExpError::NonFinite(format!("table {}", t.name)));
        }
    }
    Ok(())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExpError + '_ {
    move |source| ExpError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `<table>.csv` for every table and `summary.json`; returns the paths written.
pub fn emit(report: &Report, dir: &Path) -> ExpResult<Vec<PathBuf>> {
    ensure_finite(report)?;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    for table in &report.tables {
        let path = dir.join(format!("{}.csv", table.name));
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| ExpError::Io {
            path: path.clone(),
            source: std::io::Error::other(e.to_string()),
        };
        w.write_record(&table.columns).map_err(csv_err)?;
        for row in &table.rows {
            w.write_record(row.iter().map(|v| v.to_string())).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| ExpError::Io {
            path: path.clone(),
            source: std::io::Error::other(e.to_string()),
        })?;
        fs::write(&path, bytes).map_err(io_err(&path))?;
        written.push(path);
    }
    let path = dir.join("summary.json");
    let mut json = serde_json::to_string_pretty(&SummaryView::from(report)).map_err(|e| ExpError::Io {
        path: path.clone(),
        source: std::io::Error::other(e.to_string()),
    })?;
    json.push('\n');
    fs::write(&path, json).map_err(io_err(&path))?;
    written.push(path);
    Ok(written)
}

#[derive(Serialize)]
struct SummaryView<'a> {
    #[serde(flatten)]
    report: &'a Report,
    tables: Vec<&'a str>,
    all_checks_passed: bool,
}

impl<'a> From<&'a Report> for SummaryView<'a> {
    fn from(report: &'a Report) -> Self {
        Self {
            report,
            tables: report.tables.iter().map(|t| t.name.as_str()).collect(),
            all_checks_passed: report.all_checks_passed(),
        }
    }
}
