//! Experiment harness: strict JSON configuration, preset expansion,
//! deterministic experiment orchestration, and CSV/JSON result persistence
//! with a hashed output manifest.

pub mod config;
pub mod error;
pub mod runner;

pub use config::{table_lambda, Experiment, ExperimentConfig, Preset};
pub use error::{HarnessError, Result};
pub use runner::{run_experiment, Manifest};
