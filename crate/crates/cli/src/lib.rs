//! Experiment-runner library behind the `l2flow` binary: configuration
//! parsing, initial-data synthesis, file formats (CSV series, JSON
//! checkpoints, SVG summaries), verification commands, and the
//! convergence-threshold sweep.

pub mod checkpoint;
pub mod checks;
pub mod config;
pub mod csvout;
pub mod init;
pub mod runner;
pub mod svg;
pub mod sweep;

pub use config::{BackgroundSpec, ConfigError, ExperimentConfig, InitSpec, OutputSpec};
pub use runner::{cmd_run, RunArtifacts, RunOutcome};
