//! Parallel, order-preserving execution of scenarios and suites.

use rayon::prelude::*;
use serde_json::json;

use crate::checks;
use crate::report::{CheckRecord, Environment, ScenarioReport, Status};
use crate::scenario::{Scenario, ScenarioError};

pub const THREADS_ENV: &str = "TWISTDEX_THREADS";

/// Overrides applied on top of a scenario file.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub rank_tolerance: Option<f64>,
}

/// Builds the scenario and runs its suites concurrently; records come back
/// in declaration order. A build failure becomes a single failing record.
pub fn run_scenario(s: &Scenario, overrides: Overrides) -> ScenarioReport {
    match s.build(overrides.seed, overrides.rank_tolerance) {
        Ok(built) => {
            let environment = Environment::new(&s.name, built.seed, built.tolerances, s.checks.clone());
            let records = s
                .checks
                .par_iter()
                .map(|name| checks::run_suite(checks::suite(name).expect("suite names are validated on load"), &built))
                .collect::<Vec<_>>()
                .into_iter()
                .flatten()
                .collect();
            ScenarioReport { environment, records }
        }
        Err(e) => {
            let mut tolerances = s.tolerances;
            if let Some(t) = overrides.rank_tolerance {
                tolerances.rank = t;
            }
            let seed = overrides.seed.unwrap_or(s.seed);
            let message = match &e {
                ScenarioError::Build { source, .. } => source.to_string(),
                other => other.to_string(),
            };
            let record = CheckRecord {
                record: "check",
                scenario: s.name.clone(),
                check: "build".into(),
                subject: "scenario".into(),
                anchor: "scenario construction".into(),
                values: json!({}),
                residual: f64::NAN,
                scale: 0.0,
                tolerance: 0.0,
                pass: false,
                status: Status::Fail,
                message: Some(message),
                wall_time_ms: 0.0,
            };
            ScenarioReport { environment: Environment::new(&s.name, seed, tolerances, s.checks.clone()), records: vec![record] }
        }
    }
}

pub fn run_all(scenarios: &[Scenario], overrides: Overrides) -> Vec<ScenarioReport> {
    scenarios.par_iter().map(|s| run_scenario(s, overrides)).collect()
}

/// Worker count from `TWISTDEX_THREADS`; `None` when unset.
pub fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{THREADS_ENV} must be a positive integer, got {v:?}")),
        },
    }
}

/// Runs `f` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}
