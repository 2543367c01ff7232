//! Command-line front end for the `abstainer` library.

pub mod commands;
pub mod config;
pub mod error;
pub mod svg;

pub use commands::{execute, run_from, Cli};
pub use error::{CliError, Result};
