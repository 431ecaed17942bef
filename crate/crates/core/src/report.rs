//! Verification records: one line of JSON per checked instance.

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Slack for comparisons of a measured quantity against a proven bound:
/// floating-point rounding of the two sides, nothing more.
pub const FLOAT_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub instance: String,
    pub bound: f64,
    pub measured: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Report {
    /// Passes when `measured <= bound` up to [`FLOAT_SLACK`].
    pub fn at_most(suite: &str, instance: impl Into<String>, measured: f64, bound: f64) -> Self {
        let pass = measured <= bound + FLOAT_SLACK * (1.0 + bound.abs());
        Report { suite: suite.into(), instance: instance.into(), bound, measured, pass, note: None }
    }

    /// Passes when `measured > bound`.
    pub fn above(suite: &str, instance: impl Into<String>, measured: f64, bound: f64) -> Self {
        Report { suite: suite.into(), instance: instance.into(), bound, measured, pass: measured > bound, note: None }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Fails the report (keeping the numbers) and records why.
    pub fn failed(mut self, note: impl Into<String>) -> Self {
        self.pass = false;
        self.note = Some(note.into());
        self
    }

    pub fn to_json_line(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| crate::Error::invalid(e.to_string()))
    }
}

/// Number of failing reports.
pub fn failures(reports: &[Report]) -> usize {
    reports.iter().filter(|r| !r.pass).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_line_round_trips() {
        let r = Report::at_most("jung", "E2-1-0", 0.5, 0.57).with_note("x");
        let back: Report = serde_json::from_str(&r.to_json_line().unwrap()).unwrap();
        assert_eq!(back, r);
        assert!(r.pass);
        assert!(!Report::at_most("s", "i", 1.0, 0.5).pass);
    }
}
