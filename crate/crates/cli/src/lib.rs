//! Library half of the `hypercs` binary: argument definitions, file
//! formats and subcommand implementations.

pub mod commands;
pub mod error;
pub mod formats;

pub use commands::{run, Cli};
pub use error::CliError;
