use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MorError {
    #[error("matrix is numerically singular (pivot {pivot:.3e} at column {column}){}", fmt_arg(.argument))]
    SingularMatrix {
        column: usize,
        pivot: f64,
        argument: Option<Complex64>,
    },

    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    DimensionMismatch {
        context: String,
        expected: String,
        found: String,
    },

    #[error("numerical rank {rank} is smaller than the requested {requested}")]
    RankTooSmall { rank: usize, requested: usize },

    #[error("delay must be nonnegative, got {0}")]
    NegativeDelay(f64),

    #[error("reduced order {requested} cannot be reached: {reason}")]
    TargetOrderUnreachable { requested: usize, reason: String },

    #[error("projection basis {which} has rank {rank} < {cols} columns")]
    RankDeficientBasis {
        which: &'static str,
        rank: usize,
        cols: usize,
    },

    #[error("time integration failed at t = {time}: {reason}")]
    IntegrationFailure { time: f64, reason: String },

    #[error("reference signal is identically zero")]
    ZeroReference,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported system form: {0}")]
    Unsupported(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
}

fn fmt_arg(arg: &Option<Complex64>) -> String {
    match arg {
        Some(s) => format!(" at s = {}{:+}i", s.re, s.im),
        None => String::new(),
    }
}

impl MorError {
    pub(crate) fn dims(context: &str, expected: impl ToString, found: impl ToString) -> Self {
        MorError::DimensionMismatch {
            context: context.to_string(),
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    /// Attach the frequency argument at which a factorization failed.
    pub fn at(self, s: Complex64) -> Self {
        match self {
            MorError::SingularMatrix { column, pivot, .. } => MorError::SingularMatrix {
                column,
                pivot,
                argument: Some(s),
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, MorError>;
