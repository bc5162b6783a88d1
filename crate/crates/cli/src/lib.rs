//! Command-line front end: configuration files, CSV ingestion, result
//! documents and the per-example commands.

pub mod bundle;
pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;

pub use commands::{run, write_output, Command, Context, Output};
pub use config::{Example, ExperimentConfig};
pub use error::CliError;
