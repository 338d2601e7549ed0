//! Command-line runner for the packlab experiments: configuration, seeded
//! parallel execution, result files and reference oracles.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod oracles;
pub mod outputs;
pub mod runner;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{CliError, Result};
pub use outputs::{ExperimentManifest, Outcome};
pub use runner::{execute, run};
