//! Configuration, stage pipeline and reports behind the `levy-survival` command.

pub mod config;
mod error;
pub mod pipeline;
pub mod report;

pub use config::{Problem, RunConfig};
pub use error::CliError;
pub use pipeline::{execute, Outcome, Stage, Target};
