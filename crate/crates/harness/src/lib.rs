//! Adversaries, baseline learners and experiment orchestration.

pub mod adversaries;
pub mod baselines;
pub mod error;
pub mod experiment;

pub use error::{HarnessError, HarnessResult};
pub use experiment::{run_experiment, ExperimentConfig, RunResult};
