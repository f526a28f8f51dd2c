use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::CliError;

/// Bumped whenever a field of the JSON report changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

/// Column order of `report.csv`.
pub const CRITERIA_CSV_HEADER: &str = "criterion,passed,measured,threshold,detail";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

impl CriterionResult {
    /// Passes when `measured <= threshold`.
    pub fn at_most(name: &str, measured: f64, threshold: f64, detail: impl Into<String>) -> Self {
        CriterionResult {
            name: name.into(),
            passed: measured <= threshold,
            measured,
            threshold,
            detail: detail.into(),
        }
    }

    /// Passes when `measured >= threshold`.
    pub fn at_least(name: &str, measured: f64, threshold: f64, detail: impl Into<String>) -> Self {
        CriterionResult {
            name: name.into(),
            passed: measured >= threshold,
            measured,
            threshold,
            detail: detail.into(),
        }
    }
}

/// Kolmogorov-Smirnov comparison of one coefficient marginal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsEntry {
    /// initial law: `zero` or `invariant`, or `remainder` for Neumann runs
    pub start: String,
    /// 1-based mode index
    pub coefficient: usize,
    pub time: f64,
    pub variance: f64,
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config: Option<ExperimentConfig>,
    pub criteria: Vec<CriterionResult>,
    pub ks: Vec<KsEntry>,
    pub timings: Vec<Timing>,
    /// files written, relative to the output directory
    pub artifacts: Vec<PathBuf>,
}

impl RunReport {
    pub fn new(config: Option<ExperimentConfig>) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            config,
            criteria: Vec::new(),
            ks: Vec::new(),
            timings: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    /// Criteria as CSV. Timings are left out so reruns compare equal.
    pub fn criteria_csv(&self) -> String {
        let mut s = format!("{CRITERIA_CSV_HEADER}\n");
        for c in &self.criteria {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                c.name,
                c.passed,
                c.measured,
                c.threshold,
                csv_field(&c.detail)
            );
        }
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Writes `report.csv` or `report.json` into `dir`.
pub fn emit_report(report: &RunReport, format: ReportFormat, dir: &Path) -> Result<PathBuf, CliError> {
    let (name, body) = match format {
        ReportFormat::Csv => ("report.csv", report.criteria_csv()),
        ReportFormat::Json => (
            "report.json",
            serde_json::to_string_pretty(report).map_err(|e| CliError::Serialize(e.to_string()))? + "\n",
        ),
    };
    let path = dir.join(name);
    write_file(&path, &body)?;
    Ok(path)
}

pub(crate) fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    std::fs::write(path, body).map_err(|e| CliError::OutputDir {
        path: path.parent().unwrap_or(Path::new(".")).to_path_buf(),
        reason: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_valid() {
        let dir = tempfile::tempdir().unwrap();
        let r = RunReport::new(None);
        let p = emit_report(&r, ReportFormat::Json, dir.path()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
        assert_eq!(v["criteria"], serde_json::json!([]));
        let p = emit_report(&r, ReportFormat::Csv, dir.path()).unwrap();
        assert_eq!(std::fs::read_to_string(p).unwrap(), format!("{CRITERIA_CSV_HEADER}\n"));
    }

    #[test]
    fn details_are_quoted() {
        let mut r = RunReport::new(None);
        r.criteria.push(CriterionResult::at_most("x", 1.0, 2.0, "a, \"b\""));
        assert!(r.criteria_csv().ends_with("x,true,1,2,\"a, \"\"b\"\"\"\n"));
        assert!(r.all_passed());
        r.criteria.push(CriterionResult::at_least("y", 1.0, 2.0, ""));
        assert!(!r.all_passed());
    }
}
