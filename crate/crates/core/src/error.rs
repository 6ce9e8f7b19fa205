use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("column {0} is identically zero")]
    ZeroColumn(usize),

    #[error(
        "design is rank deficient: smallest singular value {smallest:.3e} <= tolerance {tol:.3e}"
    )]
    RankDeficient { smallest: f64, tol: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionError(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("s vector is infeasible: 2Diag(s) - Diag(s) G^-1 Diag(s) has eigenvalue {min_eigenvalue:.3e}")]
    InfeasibleS { min_eigenvalue: f64 },

    #[error("coordinate descent did not converge in {max_iters} sweeps at lambda = {lambda:.6e}")]
    NoConvergence { max_iters: usize, lambda: f64 },

    #[error("need at least {floor} null draws, got {got}")]
    InsufficientDraws { got: usize, floor: usize },

    #[error("step-up critical values missing or of wrong length")]
    MissingConstants,

    #[error("least-squares fit has zero residual variance")]
    DegenerateFit,

    #[error("dataset is empty after cleaning")]
    EmptyDataset,

    #[error("design is rank deficient after cleaning; offending columns: {}", .columns.join(", "))]
    RankDeficientAfterCleaning { columns: Vec<String> },

    #[error("unknown label: {0}")]
    UnknownLabel(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: u64,
        column: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Coarse classification used to map errors onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Numerical,
    Config,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::ZeroColumn(_)
            | Error::DimensionError(_)
            | Error::EmptyDataset
            | Error::UnknownLabel(_)
            | Error::Parse { .. }
            | Error::Io(_)
            | Error::InvalidInput(_)
            | Error::RankDeficientAfterCleaning { .. } => ErrorKind::Input,
            Error::RankDeficient { .. }
            | Error::NotPositiveDefinite
            | Error::InfeasibleS { .. }
            | Error::NoConvergence { .. }
            | Error::DegenerateFit => ErrorKind::Numerical,
            Error::InsufficientDraws { .. } | Error::MissingConstants | Error::Config(_) => {
                ErrorKind::Config
            }
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
