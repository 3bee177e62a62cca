//! Command-line driver for `toral-core`: TOML configuration, command
//! dispatch and deterministic CSV/JSON artifacts.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{run, run_config, Artifacts, COMMANDS};
pub use config::{Overrides, RunConfig};
pub use error::{CliError, CliResult};
