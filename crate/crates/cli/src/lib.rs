//! Configuration-driven runner: loads a model from JSON, runs the identity
//! suites, spectrum enumeration and oracle cross-checks, and writes one JSON
//! report.

pub mod config;
pub mod json;
pub mod report;
pub mod run;

use thiserror::Error;

pub use config::RunConfig;
pub use report::Report;
pub use run::{execute, Command, Outcome};

#[derive(Debug, Error)]
pub enum CliError {
    /// Schema or semantic violation at a field path such as `alpha` or
    /// `oracle.states[1].l`.
    #[error("invalid config at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("cannot write {path}: {message}")]
    Write { path: String, message: String },
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl ToString) -> Self {
        CliError::Config {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        2
    }
}
