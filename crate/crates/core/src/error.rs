use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the crate.
///
/// The variants fall into three groups that the CLI maps onto exit codes:
/// configuration problems, data problems and numerical failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid penalty: {0}")]
    InvalidPenalty(String),

    #[error("prox weight {weight} with zeta {zeta} gives weight*zeta = {product} >= 1/2; the prox objective is not strongly convex")]
    ProxNotStronglyConvex { weight: f64, zeta: f64, product: f64 },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("constant stepsize {alpha} is not admissible: it must be strictly below {bound}")]
    StepsizeTooLarge { alpha: f64, bound: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("data must be centered (column means subtracted) for this operation")]
    Uncentered,

    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("non-finite objective at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("backtracking exceeded {0} reductions without satisfying the sufficient-decrease test")]
    BacktrackingExhausted(usize),

    #[error("model file: {0}")]
    ModelFile(String),
}

/// Coarse classification of an [`Error`], used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidPenalty(_)
            | Error::ProxNotStronglyConvex { .. }
            | Error::InvalidConfig(_)
            | Error::StepsizeTooLarge { .. } => ErrorClass::Config,
            Error::DimensionMismatch { .. }
            | Error::InvalidData(_)
            | Error::Uncentered
            | Error::Parse { .. }
            | Error::Io { .. }
            | Error::ModelFile(_) => ErrorClass::Data,
            Error::NonFinite { .. } | Error::BacktrackingExhausted(_) => ErrorClass::Numerical,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
