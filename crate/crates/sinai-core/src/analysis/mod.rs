//! Good-environment checking and statistical experiment drivers.
//!
//! The drivers turn the localization and concentration statements into
//! seed-deterministic experiments: per-trial records plus aggregates that
//! are exactly recomputable from the records, independent of worker count.

pub mod config;
pub mod experiments;
pub mod goodenv;
pub mod result;
pub mod stats;

pub use config::{ConfigError, ExperimentConfig, ExperimentKind, ThetaSpec};
pub use experiments::{aggregate, run_experiment};
pub use goodenv::{check_good_environment, GoodEnvReport, PropertyCheck};
pub use result::{ExperimentResult, FailureCounts, TrialRecord};
