//! Configuration, evaluators and commands behind the `fracopt` binary.

pub mod commands;
pub mod config;
pub mod evaluator;
pub mod output;

pub use commands::{Outcome, Status};
pub use config::{EvaluatorKind, RunConfig};
