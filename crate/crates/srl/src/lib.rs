//! File formats, run records and subcommands of the `srl` front end.

pub mod commands;
pub mod error;
pub mod io;
pub mod run_config;

pub use error::{CliError, Result};
