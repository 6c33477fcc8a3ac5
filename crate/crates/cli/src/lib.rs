//! Command-line front end for the hybrid delivery model: evaluation,
//! optimisation, sweeps and simulation cross-checks, with CSV output.

pub mod commands;
pub mod error;
pub mod range;
pub mod sweep;

pub use error::CliError;
