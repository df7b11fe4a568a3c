//! Command-line front end: JSON configuration, subcommands and report files.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime or validation failure,
//! 3 a verdict disagreed (`verify` and `scenario` only).

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{determinism_criterion, run, Cli, CliError, Command, DETERMINISM_CRITERION};
pub use config::{parse_config, RunConfig};
