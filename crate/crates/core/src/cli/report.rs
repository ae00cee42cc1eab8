//! Per-scenario JSON reports and the summary CSV.

use serde::Serialize;

use crate::identities::Tolerances;

use super::scenario::{CheckKind, DomainRef, Expectation, MapRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    HypothesisViolation,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::HypothesisViolation => "hypothesis-violation",
            Status::Error => "error",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub check: CheckKind,
    pub status: Status,
    /// The quantity compared against `tolerance`; `null` if not computed.
    pub discrepancy: Option<f64>,
    pub tolerance: f64,
    pub details: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckRecord {
    pub fn error(check: CheckKind, tolerance: f64, message: String) -> Self {
        Self {
            check,
            status: Status::Error,
            discrepancy: None,
            tolerance,
            details: serde_json::Value::Null,
            error: Some(message),
        }
    }
}

/// Fields that differ between identical runs.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Volatile {
    pub duration_ms: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub library_version: &'static str,
    /// `pass`, `fail` or `error`.
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expectation>,
    pub domain: DomainRef,
    pub map_plus: MapRef,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map_minus: Option<MapRef>,
    pub order: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    /// `max |f₊ - f₋|` over boundary samples.
    pub boundary_gap: Option<f64>,
    pub max_discrepancy: Option<f64>,
    pub checks: Vec<CheckRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub volatile: Volatile,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// The report with `volatile` zeroed, for byte comparisons.
    pub fn stable(&self) -> Self {
        Self { volatile: Volatile { duration_ms: 0 }, ..self.clone() }
    }
}

/// Overall status: every check passes, or, for negative controls, at least
/// one check detects the violated hypothesis and none fails.
pub fn scenario_status(checks: &[CheckRecord], expect: Option<Expectation>) -> Status {
    if checks.iter().any(|c| c.status == Status::Error) {
        return Status::Error;
    }
    let ok = match expect {
        None => checks.iter().all(|c| c.status == Status::Pass),
        Some(Expectation::HypothesisViolation) => {
            checks.iter().all(|c| c.status != Status::Fail)
                && checks.iter().any(|c| c.status == Status::HypothesisViolation)
        }
    };
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn sci(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub const CSV_HEADER: [&str; 6] = ["id", "status", "max_discrepancy", "boundary_gap", "order", "duration_ms"];

/// Summary table, one row per report, LF line endings.
pub fn summary_csv(reports: &[ScenarioReport]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in reports {
        w.write_record([
            r.scenario.clone(),
            r.status.as_str().to_string(),
            sci(r.max_discrepancy),
            sci(r.boundary_gap),
            r.order.to_string(),
            r.volatile.duration_ms.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(status: Status) -> CheckRecord {
        CheckRecord {
            check: CheckKind::Theorem1,
            status,
            discrepancy: Some(0.0),
            tolerance: 1.0,
            details: serde_json::Value::Null,
            error: None,
        }
    }

    #[test]
    fn status_rules() {
        use Status::*;
        assert_eq!(scenario_status(&[record(Pass), record(Pass)], None), Pass);
        assert_eq!(scenario_status(&[record(Pass), record(HypothesisViolation)], None), Fail);
        let neg = Some(Expectation::HypothesisViolation);
        assert_eq!(scenario_status(&[record(Pass), record(HypothesisViolation)], neg), Pass);
        assert_eq!(scenario_status(&[record(Pass)], neg), Fail);
        assert_eq!(scenario_status(&[record(HypothesisViolation), record(Fail)], neg), Fail);
        assert_eq!(scenario_status(&[record(Pass), record(Error)], None), Error);
        assert_eq!(scenario_status(&[], None), Pass);
    }

    #[test]
    fn empty_summary_is_header_only() {
        assert_eq!(summary_csv(&[]), "id,status,max_discrepancy,boundary_gap,order,duration_ms\n");
    }
}
