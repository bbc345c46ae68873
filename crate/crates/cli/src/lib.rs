//! Command-line experiment runner for the `qgamble` simulator.
//!
//! [`config`] resolves flags and config files into a [`RunConfig`],
//! [`commands::run`] turns it into a [`ResultDocument`], and [`report`]
//! encodes that as JSON or CSV.

pub mod commands;
pub mod config;
pub mod report;

pub use commands::{run, RunError};
pub use config::{Cli, Command, ConfigError, OutputFormat, RunConfig};
pub use report::{serialize, Metric, ResultDocument, Table};
