//! Parallel execution, output formats and the command implementations behind
//! the `fareyphase` tool.
//!
//! The numerics live in [`fareyphase_core`]; this crate adds a rayon-backed
//! [`runner::Pool`], CSV and JSON writers that echo the run configuration, and
//! one function per command in [`commands`].

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod runner;

pub use config::RunConfig;
pub use error::CliError;
pub use runner::Pool;
