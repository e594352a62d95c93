//! Command-line front end: configuration files, output schemas and the
//! `race-sim` subcommands.

pub mod commands;
pub mod config;
pub mod csv;
pub mod error;

pub use error::CliError;
