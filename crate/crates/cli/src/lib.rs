//! Command line experiment runner: configuration, per-experiment reports and the
//! acceptance criteria.

pub mod acceptance;
pub mod config;
pub mod experiments;
pub mod report;
mod run;

pub use config::{Cli, Command, ExperimentConfig, Opts};
pub use report::{Check, Report};
pub use run::{run, Manifest, RunError};
