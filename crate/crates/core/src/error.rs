use std::path::PathBuf;

use thiserror::Error;

use crate::estimator::ScheduleReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("graph generation failed after {attempts} attempts ({spec})")]
    GenerationFailure { attempts: usize, spec: String },

    #[error("finite-difference spacing must be positive, got {0}")]
    InvalidSpacing(f64),

    #[error("ground-truth solver did not reach tolerance {tol:e} within {iterations} iterations")]
    ConvergenceFailure { tol: f64, iterations: usize },

    #[error("iterate diverged at iteration {iteration}, node {node}{}", run.map(|r| format!(", run {r}")).unwrap_or_default())]
    Divergence {
        iteration: u64,
        node: usize,
        run: Option<usize>,
    },

    #[error("weight schedule rejected: {0}")]
    Schedule(ScheduleReport),

    #[error("rate undefined: {0}")]
    RateUndefined(String),

    #[error("parse error in {origin}: {message}")]
    Parse { origin: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(origin: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            origin: origin.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
