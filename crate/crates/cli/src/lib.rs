//! Library side of the `perpcool` command-line tool: experiment files,
//! the computations behind each subcommand, and output writers.

pub mod commands;
pub mod config;
pub mod output;
pub mod units;
