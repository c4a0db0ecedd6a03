//! Command-line harness for the `feec-core` multipatch solvers: TOML configuration,
//! named test cases, subcommands and result files.

pub mod cases;
pub mod commands;
pub mod config;
pub mod error;
pub mod mm;
pub mod output;

pub use config::{parse_config, RunConfig};
pub use error::{CliError, Result};
