//! Report records and their deterministic serialization.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Campaign;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    /// An audit finding: a stated formula does not hold as written.
    /// Flags do not fail a campaign.
    Flag,
    Fail,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Flag => "flag",
            Status::Fail => "fail",
        }
    }
}

/// One measured quantity against its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// Topic of the source material that the check exercises.
    pub anchor: String,
    /// `None` when the measurement could not be taken or is not finite.
    pub value: Option<f64>,
    pub tol: f64,
    pub status: Status,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl Check {
    /// Passes iff `value ≤ tol`.
    pub fn measure(name: impl Into<String>, anchor: &str, value: f64, tol: f64) -> Self {
        let ok = value <= tol;
        Self {
            name: name.into(),
            anchor: anchor.into(),
            value: finite(value),
            tol,
            status: if ok { Status::Pass } else { Status::Fail },
        }
    }

    /// Audit of a stated formula: flagged (never failed) when
    /// `value > tol`.
    pub fn audit(name: impl Into<String>, anchor: &str, value: f64, tol: f64) -> Self {
        let mut c = Self::measure(name, anchor, value, tol);
        if c.status == Status::Fail {
            c.status = Status::Flag;
        }
        c
    }

    /// A check with an explicitly decided status.
    pub fn with_status(name: impl Into<String>, anchor: &str, value: f64, tol: f64, status: Status) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            value: finite(value),
            tol,
            status,
        }
    }

    /// A measurement that could not be completed.
    pub fn crashed(name: impl Into<String>, anchor: &str) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            value: None,
            tol: 0.0,
            status: Status::Fail,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub flag: usize,
    pub fail: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Repro {
    pub seed: u64,
    pub params: Campaign,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub summary: Summary,
    pub checks: Vec<Check>,
    pub repro: Repro,
}

impl Report {
    pub fn new(campaign: &Campaign, checks: Vec<Check>) -> Self {
        let mut summary = Summary::default();
        for c in &checks {
            match c.status {
                Status::Pass => summary.pass += 1,
                Status::Flag => summary.flag += 1,
                Status::Fail => summary.fail += 1,
            }
        }
        Self {
            summary,
            checks,
            repro: Repro {
                seed: campaign.seed,
                params: campaign.clone(),
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
        }
    }

    pub fn passed(&self) -> bool {
        self.summary.fail == 0
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Pretty JSON with declaration-order keys and shortest round-trip floats.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        s.push('\n');
        s
    }

    /// One row per check.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["name", "anchor", "value", "tol", "status"])
            .expect("in-memory csv");
        for c in &self.checks {
            let value = c.value.map(|v| v.to_string()).unwrap_or_default();
            w.write_record([
                c.name.as_str(),
                c.anchor.as_str(),
                value.as_str(),
                c.tol.to_string().as_str(),
                c.status.as_str(),
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    CsvSummary,
}

impl Format {
    pub fn file_name(&self) -> &'static str {
        match self {
            Format::Json => "report.json",
            Format::CsvSummary => "summary.csv",
        }
    }
}

/// Write `report` into `dir` in `format`; returns the file written.
pub fn emit_report(report: &Report, format: Format, dir: &Path) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format.file_name());
    let body = match format {
        Format::Json => report.to_json(),
        Format::CsvSummary => report.to_csv(),
    };
    fs::write(&path, body)?;
    Ok(path)
}
