//! Command-line front end: JSON scenarios in, CSV/PGM files out.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{cmd_montecarlo, cmd_survey, run, Cli, CliError};
pub use config::{load_config, parse_config, ConfigError};
pub use output::{write_grid, GridFormat};
