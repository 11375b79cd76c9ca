//! Scenario-driven verification of twisted spectral triple identities.
//!
//! A scenario file describes a triple, idempotents, connections and
//! homotopies; [`runner::run_scenario`] builds it with `twistdex-core` and
//! runs the requested check suites, producing one record per identity.

pub mod checks;
pub mod examples;
pub mod report;
pub mod runner;
pub mod scenario;

pub use report::{CheckRecord, ScenarioReport, Status};
pub use runner::{run_all, run_scenario, Overrides};
pub use scenario::{Built, Scenario, ScenarioError};
