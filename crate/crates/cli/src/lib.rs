pub mod commands;
pub mod experiments;
pub mod problem;

use std::path::PathBuf;

use thiserror::Error;

use problem::{BuildError, ParseError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}", path = .path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}", path = .path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("invalid problem: {0}")]
    Build(#[from] BuildError),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("experiment {0} failed its check")]
    ExperimentFailed(String),
}

impl CliError {
    /// 2 for usage and input errors, 1 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } | CliError::Usage(_) | CliError::Read { .. } => 2,
            CliError::Build(BuildError::Numerics(_)) => 1,
            CliError::Build(_) => 2,
            CliError::Write { .. } | CliError::Numerical(_) | CliError::ExperimentFailed(_) => 1,
        }
    }
}

pub(crate) fn numerical(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

/// Seventeen significant digits, enough to round-trip any f64.
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}
