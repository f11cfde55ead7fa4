use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::svg;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Vacuous,
    ReportOnly,
}

impl Status {
    pub fn of(ok: bool) -> Self {
        if ok {
            Self::Pass
        } else {
            Self::Fail
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::Vacuous => "vacuous",
            Self::ReportOnly => "report-only",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub name: String,
    pub status: Status,
    pub measured_constant: Option<f64>,
    pub witnesses: Vec<Value>,
    /// Suite-specific measurements.
    pub details: Value,
    /// Wall time in seconds; the only nondeterministic field.
    pub runtime: f64,
}

impl Record {
    pub fn new(name: &str, status: Status, measured_constant: Option<f64>, details: Value) -> Self {
        Self { name: name.into(), status, measured_constant, witnesses: Vec::new(), details, runtime: 0.0 }
    }

    pub fn with_witnesses(mut self, w: Vec<Value>) -> Self {
        self.witnesses = w;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub depth: u32,
    pub records: Vec<Record>,
}

impl SuiteReport {
    pub fn failed(&self) -> bool {
        self.records.iter().any(|r| r.status == Status::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// One line per record.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let c = r.measured_constant.map_or("-".to_string(), |c| format!("{c:.4e}"));
            out.push_str(&format!("{:<24} {:<12} {:>12}  {:.2}s\n", r.name, r.status.label(), c, r.runtime));
        }
        out
    }
}

/// A CSV table produced by a suite.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub enum Plot {
    /// Per-scale decay, log2 of the value against j.
    Decay { name: String, title: String, series: Vec<(String, Vec<(f64, f64)>)> },
    Histogram { name: String, title: String, values: Vec<f64> },
}

impl Plot {
    pub fn name(&self) -> &str {
        match self {
            Plot::Decay { name, .. } | Plot::Histogram { name, .. } => name,
        }
    }

    pub fn render(&self) -> String {
        match self {
            Plot::Decay { title, series, .. } => svg::decay_plot(title, series),
            Plot::Histogram { title, values, .. } => svg::histogram(title, values, 20),
        }
    }
}

/// Records plus the tables and plots that go next to the JSON report.
#[derive(Default)]
pub struct SuiteOutput {
    pub records: Vec<Record>,
    pub tables: Vec<Table>,
    pub plots: Vec<Plot>,
}

impl SuiteOutput {
    pub fn record(r: Record) -> Self {
        Self { records: vec![r], ..Default::default() }
    }
}

/// Writes `report.json`, `tables/*.csv` and `plots/*.svg`; returns the paths.
pub fn write_outputs(dir: &Path, report: &SuiteReport, tables: &[Table], plots: &[Plot]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    let json = dir.join("report.json");
    std::fs::write(&json, report.to_json())?;
    written.push(json);
    if !tables.is_empty() {
        std::fs::create_dir_all(dir.join("tables"))?;
    }
    for t in tables {
        let p = dir.join("tables").join(format!("{}.csv", t.name));
        t.write(&p)?;
        written.push(p);
    }
    if !plots.is_empty() {
        std::fs::create_dir_all(dir.join("plots"))?;
    }
    for p in plots {
        let path = dir.join("plots").join(format!("{}.svg", p.name()));
        std::fs::write(&path, p.render())?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn status_serializes_kebab_case() {
        assert_eq!(serde_json::to_value(Status::ReportOnly).unwrap(), json!("report-only"));
        let r = SuiteReport { seed: 1, depth: 5, records: vec![Record::new("x", Status::Fail, None, json!({}))] };
        assert!(r.failed());
        let back: SuiteReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
