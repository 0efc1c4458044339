use thiserror::Error;

/// Errors raised by the numerical routines and the command layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("conjugate point at t = {time:.6} (beta = {beta})")]
    ConjugatePoint { beta: f64, time: f64 },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) | Error::Json(_) => 2,
            Error::InsufficientData(_) => 3,
            Error::Solver(_) | Error::ConjugatePoint { .. } | Error::Evaluation(_) => 4,
            Error::Io(_) | Error::Csv(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
