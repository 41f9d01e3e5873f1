//! Scaling reports and their CSV, JSON and plot-data renderings.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ReportFormat};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    Blowup,
    LemmaSuite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BlowupVerdict {
    UnboundedWitness,
    Consistent,
}

impl fmt::Display for BlowupVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlowupVerdict::UnboundedWitness => "UNBOUNDED_WITNESS",
            BlowupVerdict::Consistent => "CONSISTENT",
        })
    }
}

/// One verdict: `|fitted - predicted| <= tolerance` for slopes, or a bound for uniformity checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub fitted: f64,
    pub predicted: f64,
    pub tolerance: f64,
    pub max_residual: f64,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn slope(name: &str, fitted: f64, predicted: f64, tolerance: f64, max_residual: f64) -> Self {
        Check {
            name: name.to_string(),
            fitted,
            predicted,
            tolerance,
            max_residual,
            pass: (fitted - predicted).abs() <= tolerance,
            detail: String::new(),
        }
    }

    /// A check against a bound rather than a predicted slope; `pass` is decided by the caller.
    pub fn bound(name: &str, value: f64, limit: f64, pass: bool) -> Self {
        Check {
            name: name.to_string(),
            fitted: value,
            predicted: limit,
            tolerance: 0.0,
            max_residual: 0.0,
            pass,
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn and(mut self, ok: bool, why: &str) -> Self {
        if !ok {
            self.pass = false;
            if !self.detail.is_empty() {
                self.detail.push_str("; ");
            }
            self.detail.push_str(why);
        }
        self
    }

    /// `PASS name: fitted .. predicted .. (tol ..)`.
    pub fn line(&self) -> String {
        let mut s = format!(
            "{} {}: fitted {}, predicted {}, tolerance {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            num(self.fitted),
            num(self.predicted),
            self.tolerance
        );
        if !self.detail.is_empty() {
            s.push_str(&format!(" ({})", self.detail));
        }
        s
    }
}

fn num(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-3 {
        format!("{v:.3e}")
    } else {
        format!("{v:.4}")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JRow {
    pub j: u32,
    pub quantities: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub kind: ReportKind,
    pub config: ExperimentConfig,
    pub m0: String,
    pub b1: f64,
    pub b2: f64,
    pub rows: Vec<JRow>,
    pub checks: Vec<Check>,
    pub verdict: Option<BlowupVerdict>,
    /// Flags such as capped truncation tails or non-monotone residuals.
    pub notes: Vec<String>,
}

impl ScalingReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn series(&self, quantity: &str) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| r.quantities.get(quantity).map(|v| (r.j as f64, *v)))
            .collect()
    }

    fn quantity_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.rows.iter().flat_map(|r| r.quantities.keys().cloned()).collect();
        names.sort();
        names.dedup();
        names
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("j,quantity,value\n");
        for r in &self.rows {
            for (q, v) in &r.quantities {
                s.push_str(&format!("{},{q},{v:.17e}\n", r.j));
            }
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Blocks of `j log2(value)` separated by blank lines, one per quantity.
    pub fn to_plotdata(&self) -> String {
        let mut s = String::new();
        for q in self.quantity_names() {
            s.push_str(&format!("# {q}\n"));
            for (j, v) in self.series(&q) {
                s.push_str(&format!("{j} {:.12}\n", v.log2()));
            }
            s.push_str("\n\n");
        }
        s
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&c.line());
            s.push('\n');
        }
        if let Some(v) = self.verdict {
            s.push_str(&format!("verdict: {v}\n"));
        }
        for n in &self.notes {
            s.push_str(&format!("note: {n}\n"));
        }
        s
    }
}

/// Writes `<stem>.<ext>` for one format and returns the path.
pub fn emit_report(report: &ScalingReport, format: ReportFormat, stem: &Path) -> Result<PathBuf> {
    if report.rows.is_empty() {
        return Err(Error::Config("report has an empty j table".into()));
    }
    let path = stem.with_extension(format.extension());
    let text = match format {
        ReportFormat::Csv => report.to_csv(),
        ReportFormat::Json => report.to_json()?,
        ReportFormat::Plotdata => report.to_plotdata(),
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
