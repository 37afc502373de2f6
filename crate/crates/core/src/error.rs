use thiserror::Error;

/// Errors raised by matrix construction, I/O and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("entry ({row}, {col}, {value}) is outside a {n_rows}x{n_cols} matrix")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        value: f64,
        n_rows: usize,
        n_cols: usize,
    },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid CSR structure: {0}")]
    InvalidStructure(String),

    #[error("unsupported Matrix Market format: {0}")]
    UnsupportedFormat(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("matrix is not upper Hessenberg: entry ({row}, {col}) is {value}")]
    NotHessenberg { row: usize, col: usize, value: f64 },

    #[error("matrix is not symmetric (asymmetry {asymmetry:e} relative to norm {norm:e})")]
    NotSymmetric { asymmetry: f64, norm: f64 },

    #[error("singular system: pivot {index} has magnitude {magnitude:e}")]
    Singular { index: usize, magnitude: f64 },

    #[error("ill-conditioned pencil (condition estimate {0:e})")]
    IllConditioned(f64),

    #[error("eigenvalue iteration did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("cannot access {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
