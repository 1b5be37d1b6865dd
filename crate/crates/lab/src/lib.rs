//! Experiment driver for the pivotal-site estimators: plan files,
//! deterministic parallel runs with resumption, row and cell outputs,
//! claim reports and brute-force oracles.

pub mod formats;
pub mod oracle;
pub mod plan;
pub mod record;
pub mod report;
pub mod run;

pub use plan::{Experiment, ExperimentKind, Plan, PlanError};
pub use report::{report, report_all, Claim, ClaimReport, Thresholds, Verdict};
pub use run::{run_plan, Dataset, RunOptions, RunSummary};

/// Written into manifests and folded into plan digests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
