//! Error types shared across the crate.

use std::fmt;

/// Collected invariant violations. Validation never stops at the first
/// problem; callers get the full list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violations(pub Vec<String>);

impl Violations {
    pub fn new() -> Self {
        Violations(Vec::new())
    }

    pub fn push(&mut self, msg: impl Into<String>) {
        self.0.push(msg.into());
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Ok when nothing was collected, otherwise the violation list.
    pub fn into_result(self) -> std::result::Result<(), Violations> {
        if self.is_empty() {
            Ok(())
        } else {
            Err(self)
        }
    }
}

impl Default for Violations {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Display for Violations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violation(s):", self.0.len())?;
        for v in &self.0 {
            write!(f, "\n  - {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Violations {}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("validation failed: {0}")]
    Invalid(#[from] Violations),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Overflow(String),

    #[error("solver error: {0}")]
    Solver(String),

    #[error("scenario parse error in {path}: {message}")]
    ScenarioParse { path: String, message: String },

    #[error("scenario schema error in {path}: {message}")]
    ScenarioSchema { path: String, message: String },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 validation, 3 solver, 4 verification.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invalid(_)
            | Error::ScenarioParse { .. }
            | Error::ScenarioSchema { .. }
            | Error::Io(_) => 2,
            Error::Domain(_) | Error::Overflow(_) | Error::Solver(_) => 3,
            Error::Verification(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
