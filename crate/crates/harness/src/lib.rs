//! Experiment orchestration: CLI, seeded runs, Nash-gap regret measurement,
//! invariant audits and the single-agent LSVI-UCB baseline.

pub mod audit;
pub mod baseline;
pub mod cli;
pub mod config;
pub mod experiment;
pub mod record_io;
pub mod svg;
pub mod sweep;

pub use audit::{audit, AuditReport, AuditToggles};
pub use config::{ExperimentConfig, HarnessError, ModelSource};
pub use experiment::{run_experiment, ExperimentOutput};
