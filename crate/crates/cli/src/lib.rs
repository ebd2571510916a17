//! Library side of the `tracecoef` binary: configuration, subcommands and
//! the verification suite.

pub mod commands;
pub mod config;
pub mod error;
pub mod suite;

pub use commands::{run, Output};
pub use config::{Command, FileConfig, Format, LadderSpec, RunConfig};
pub use error::CliError;
pub use suite::{run_suite, CriterionResult, SuiteOptions, SuiteReport};
