//! Experiment harness: configs, training runs, checkpoints, metrics files,
//! contour dumps, evaluation and performance profiles.

pub mod checkpoint;
pub mod config;
pub mod contour;
pub mod envs;
pub mod error;
pub mod eval;
pub mod metrics;
pub mod profile;
pub mod train;

pub use config::RunConfig;
pub use error::{HarnessError, Result};
