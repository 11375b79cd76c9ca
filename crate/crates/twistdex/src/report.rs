//! Report records, JSON-lines and table writers.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::scenario::Tolerances;

/// Version of the JSON-lines record layout.
pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Environment {
    pub record: &'static str,
    pub tool: &'static str,
    pub version: &'static str,
    pub report_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub checks: Vec<String>,
}

impl Environment {
    pub fn new(scenario: &str, seed: u64, tolerances: Tolerances, checks: Vec<String>) -> Self {
        Self {
            record: "environment",
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            report_version: REPORT_VERSION,
            scenario: scenario.to_string(),
            seed,
            tolerances,
            checks,
        }
    }
}

/// One verified statement. `pass` is `residual ≤ tolerance·scale` unless the
/// suite decides otherwise (counts, integrality, decay ratios).
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckRecord {
    pub record: &'static str,
    pub scenario: String,
    pub check: String,
    pub subject: String,
    pub anchor: String,
    pub values: Value,
    pub residual: f64,
    pub scale: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub wall_time_ms: f64,
}

impl CheckRecord {
    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioReport {
    pub environment: Environment,
    pub records: Vec<CheckRecord>,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| !r.failed())
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| r.failed())
    }

    pub fn records_for<'a>(&'a self, check: &'a str) -> impl Iterator<Item = &'a CheckRecord> + 'a {
        self.records.iter().filter(move |r| r.check == check)
    }
}

pub fn passed(reports: &[ScenarioReport]) -> bool {
    reports.iter().all(ScenarioReport::passed)
}

pub fn to_json_lines(reports: &[ScenarioReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&serde_json::to_string(&r.environment).expect("environment serializes"));
        out.push('\n');
        for rec in &r.records {
            out.push_str(&serde_json::to_string(rec).expect("record serializes"));
            out.push('\n');
        }
    }
    out
}

fn clip(s: &str, width: usize) -> String {
    if s.chars().count() <= width {
        s.to_string()
    } else {
        let mut t: String = s.chars().take(width.saturating_sub(1)).collect();
        t.push('…');
        t
    }
}

pub fn to_table(reports: &[ScenarioReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let env = &r.environment;
        let _ = writeln!(out, "scenario {}  seed {}  {} {}", env.scenario, env.seed, env.tool, env.version);
        let _ = writeln!(out, "{:<14} {:<28} {:<8} {:>11} {:>11} {:>9}  anchor", "check", "subject", "status", "residual", "scale", "ms");
        for rec in &r.records {
            let _ = writeln!(
                out,
                "{:<14} {:<28} {:<8} {:>11.3e} {:>11.3e} {:>9.2}  {}",
                rec.check,
                clip(&rec.subject, 28),
                rec.status.as_str(),
                rec.residual,
                rec.scale,
                rec.wall_time_ms,
                rec.anchor
            );
            if let Some(m) = &rec.message {
                let _ = writeln!(out, "{:<14} {}", "", m);
            }
        }
        let fails = r.failures().count();
        let _ = writeln!(out, "{} records, {} failed\n", r.records.len(), fails);
    }
    out
}

/// Drops `wallTimeMs` from every JSON line so runs can be compared byte for byte.
pub fn strip_timing(jsonl: &str) -> String {
    let mut out = String::new();
    for line in jsonl.lines() {
        match serde_json::from_str::<Value>(line) {
            Ok(Value::Object(mut m)) => {
                m.remove("wallTimeMs");
                out.push_str(&serde_json::to_string(&Value::Object(m)).expect("object serializes"));
            }
            _ => out.push_str(line),
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn record(ms: f64, status: Status) -> CheckRecord {
        CheckRecord {
            record: "check",
            scenario: "s".into(),
            check: "index".into(),
            subject: "e".into(),
            anchor: "a".into(),
            values: json!({"index": 0.0}),
            residual: 0.0,
            scale: 1.0,
            tolerance: 1e-8,
            pass: status != Status::Fail,
            status,
            message: None,
            wall_time_ms: ms,
        }
    }

    fn report(ms: f64) -> ScenarioReport {
        ScenarioReport {
            environment: Environment::new("s", 1, Tolerances::default(), vec!["index".into()]),
            records: vec![record(ms, Status::Pass), record(ms, Status::Skipped)],
        }
    }

    #[test]
    fn timing_is_the_only_difference() {
        let a = to_json_lines(&[report(1.5)]);
        let b = to_json_lines(&[report(7.25)]);
        assert_ne!(a, b);
        assert_eq!(strip_timing(&a), strip_timing(&b));
        assert!(!strip_timing(&a).contains("wallTimeMs"));
    }

    #[test]
    fn skipped_records_do_not_fail() {
        assert!(report(0.0).passed());
        let mut r = report(0.0);
        r.records.push(record(0.0, Status::Fail));
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
    }

    #[test]
    fn table_lists_every_record() {
        let t = to_table(&[report(0.0)]);
        assert_eq!(t.lines().filter(|l| l.starts_with("index")).count(), 2);
        assert!(t.contains("2 records, 0 failed"));
    }
}
