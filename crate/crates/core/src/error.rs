use thiserror::Error;

use crate::minilang::{StaticError, SuiteError, SyntaxError};

/// Failures that stop a repair run before or during search set-up.
#[derive(Debug, Error)]
pub enum RepairError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Static(#[from] StaticError),
    #[error(transparent)]
    Suite(#[from] SuiteError),
    #[error("no negative test: every test passes on the original program")]
    NoNegativeTest,
    #[error("no statement reaches the suspiciousness threshold {threshold}")]
    EmptyCandidateSet { threshold: f64 },
    #[error("NoModificationPoints: every candidate lost all admissible operations")]
    NoModificationPoints,
    #[error("no admissible bug after {attempts} attempts")]
    ExhaustedAttempts { attempts: usize },
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl RepairError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        RepairError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T, E = RepairError> = std::result::Result<T, E>;
