//! Config-driven experiment runs.

pub mod config;
pub mod runner;

pub use config::{load_config, ConfigError, ExperimentConfig, Mode};
pub use runner::{run, RunError, RunSummary};
