use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub suite: String,
    pub name: String,
    pub status: Status,
    /// Magnitude of the defect; `null` when the check could not be evaluated.
    pub residual: Option<f64>,
    /// `null` for exact checks, which pass only on equality.
    pub tolerance: Option<f64>,
    /// The identity or property being checked.
    pub reference: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Everything in a report except timing; identical for identical inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBody {
    pub suite: String,
    pub seed: u64,
    pub status: Status,
    pub config: BTreeMap<String, String>,
    pub checks: Vec<CheckRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    #[serde(flatten)]
    pub body: ReportBody,
    pub wall_time_s: f64,
}

impl Report {
    pub fn new(suite: &str, seed: u64, config: BTreeMap<String, String>, checks: Vec<CheckRecord>) -> Self {
        let status = if checks.iter().all(|c| c.status == Status::Pass) {
            Status::Pass
        } else {
            Status::Fail
        };
        Report {
            body: ReportBody {
                suite: suite.to_string(),
                seed,
                status,
                config,
                checks,
                artifacts: Vec::new(),
            },
            wall_time_s: 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        self.body.status == Status::Pass
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.body.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn body_json(&self) -> String {
        serde_json::to_string_pretty(&self.body).expect("report serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(status: Status) -> CheckRecord {
        CheckRecord {
            suite: "algebra".into(),
            name: "x".into(),
            status,
            residual: Some(0.0),
            tolerance: None,
            reference: "x = x".into(),
            detail: None,
        }
    }

    #[test]
    fn any_failure_fails_the_report() {
        let r = Report::new("algebra", 1, BTreeMap::new(), vec![record(Status::Pass), record(Status::Fail)]);
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
        assert!(Report::new("algebra", 1, BTreeMap::new(), vec![record(Status::Pass)]).passed());
    }

    #[test]
    fn json_round_trip() {
        let mut r = Report::new("kvn", 3, BTreeMap::new(), vec![record(Status::Pass)]);
        r.wall_time_s = 1.5;
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(!r.body_json().contains("wall_time"));
    }
}
