//! Experiment driver for the bilevel solver: configuration, problem
//! instances, trace/summary artifacts, sensitivity sweeps and gradient checks.

pub mod args;
pub mod config;
pub mod error;
pub mod experiments;
pub mod gradcheck;
pub mod run;

pub use args::{execute, Cli};
pub use config::{Experiment, Mode, PartialConfig, RunConfig};
pub use error::CliError;
