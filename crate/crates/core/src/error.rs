use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the controller stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("matrix is rank deficient (smallest singular value {0:e})")]
    Singular(f64),

    #[error("input with infinity norm {norm} leaves the admissible set (u_max = {u_max})")]
    InputOutOfBounds { norm: f64, u_max: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("tightened set is empty in coordinate {coordinate}: margin {margin} >= half-width {half_width}")]
    EmptyTightenedSet {
        coordinate: usize,
        margin: f64,
        half_width: f64,
    },

    #[error("optimal control problem is infeasible: {0}")]
    Infeasible(String),

    #[error("not enough data: requested {requested}, buffer holds {available}")]
    NotEnoughData { requested: usize, available: usize },

    #[error("training diverged (loss = {0})")]
    TrainingDiverged(f64),

    #[error("linearization failed: {0}")]
    Linearization(String),

    #[error("model is not stabilizable: {0}")]
    Unstabilizable(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
