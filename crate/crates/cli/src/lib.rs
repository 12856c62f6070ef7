//! Puzzle bundles on disk and the commands that generate, solve, score,
//! render and benchmark them.

pub mod bench;
pub mod commands;
pub mod error;
pub mod format;

pub use bench::{bench, RunReport};
pub use commands::{generate, render, solve, GenerateOptions, RunConfig};
pub use error::CliError;
pub use format::{Bundle, Manifest, SolutionFile};
