//! Command-line front end for the chiral spin-ring simulator: parameter
//! sweeps, CSV and JSON tables, and the differential validation suite.

pub mod commands;
pub mod config;
pub mod error;
pub mod table;
pub mod validate;

use std::fs;

pub use config::{Cli, RunConfig};
pub use error::{CliError, Result};

/// Runs one resolved configuration and writes its table to the configured
/// destination. Returns the rendered output.
pub fn run(cfg: &RunConfig) -> Result<String> {
    let outcome = commands::execute(cfg)?;
    let text = outcome.table.render(cfg.format);
    match &cfg.out {
        Some(path) => fs::write(path, &text).map_err(|source| CliError::Io { path: path.clone(), source })?,
        None => print!("{text}"),
    }
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(text),
    }
}
