//! Experiment runner and command implementations behind the `npmc` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod runner;

pub use config::{ExperimentConfig, MethodSpec};
pub use error::CliError;
pub use runner::{run_experiment, write_outputs, ExperimentOutput};
