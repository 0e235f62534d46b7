//! Library half of the `sbbf` command-line tool.
//!
//! Each subcommand is a plain function over parsed arguments so the
//! acceptance suite can drive it without spawning a process.

pub mod app;
pub mod error;
pub mod experiment;
pub mod keys;
pub mod report;

pub use app::{run, Cli};
pub use error::CliError;
pub use experiment::{bench, fpp_sim, ExperimentSpec, FilterSize, KeyMode};
pub use report::{BenchReport, Op};
