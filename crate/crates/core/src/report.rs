//! Pass/fail records and the reports that collect them.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bounds::CurvatureBudget;
use crate::error::Result;

/// Which side of the bound the measurement has to stay on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    /// measured ≤ bound + tolerance
    Upper,
    /// measured ≥ bound − tolerance
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub tolerance: f64,
    pub sense: Sense,
    pub passed: bool,
    /// Short description of the inequality being checked.
    pub anchor: String,
}

impl VerificationRecord {
    pub fn new(
        name: impl Into<String>,
        measured: f64,
        bound: f64,
        tolerance: f64,
        sense: Sense,
        anchor: impl Into<String>,
    ) -> Self {
        let mut r = Self {
            name: name.into(),
            measured,
            bound,
            tolerance,
            sense,
            passed: false,
            anchor: anchor.into(),
        };
        r.passed = r.evaluate();
        r
    }

    pub fn upper(name: impl Into<String>, measured: f64, bound: f64, tolerance: f64, anchor: impl Into<String>) -> Self {
        Self::new(name, measured, bound, tolerance, Sense::Upper, anchor)
    }

    pub fn lower(name: impl Into<String>, measured: f64, bound: f64, tolerance: f64, anchor: impl Into<String>) -> Self {
        Self::new(name, measured, bound, tolerance, Sense::Lower, anchor)
    }

    /// Recomputes the verdict from the numeric fields. NaN never passes.
    pub fn evaluate(&self) -> bool {
        match self.sense {
            Sense::Upper => self.measured <= self.bound + self.tolerance,
            Sense::Lower => self.measured >= self.bound - self.tolerance,
        }
    }

    /// Signed distance to failure; negative means the check failed.
    pub fn slack(&self) -> f64 {
        match self.sense {
            Sense::Upper => self.bound + self.tolerance - self.measured,
            Sense::Lower => self.measured - (self.bound - self.tolerance),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub budget: CurvatureBudget,
    pub h: f64,
    pub seed: u64,
    pub version: String,
    /// Tolerances are `1e-9 + tolerance_slope · h`.
    pub tolerance_slope: f64,
    pub metric: String,
    pub near_degenerate: bool,
    /// Filled in by whoever writes the report to disk; `None` keeps reports reproducible.
    #[serde(default)]
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub meta: ReportMeta,
    pub records: Vec<VerificationRecord>,
}

impl VerificationReport {
    pub fn new(meta: ReportMeta) -> Self {
        Self { meta, records: Vec::new() }
    }

    pub fn push(&mut self, record: VerificationRecord) {
        self.records.push(record);
    }

    pub fn extend(&mut self, records: impl IntoIterator<Item = VerificationRecord>) {
        self.records.extend(records);
    }

    pub fn all_passed(&self) -> bool {
        self.records.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerificationRecord> {
        self.records.iter().filter(|r| !r.passed)
    }

    pub fn find(&self, name: &str) -> Option<&VerificationRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// One record per row: name, measured, bound, tolerance, sense, passed, anchor.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Tolerance attached to every discretization-sensitive check: `1e-9 + slope · h`.
pub fn resolution_tolerance(slope: f64, h: f64) -> f64 {
    1e-9 + slope * h
}
