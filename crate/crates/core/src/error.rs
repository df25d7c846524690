use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("entry ({row}, {col}) out of range for a {nrows}x{ncols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },

    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not positive definite (pivot {pivot:e} at column {column})")]
    NotPositiveDefinite { column: usize, pivot: f64 },

    #[error("A1 is rank deficient: A1^T A1 is not positive definite")]
    RankDeficientA1,

    #[error("the ILS Hessian A1^T A1 - A2^T A2 is not positive definite")]
    HessianNotSpd,

    #[error("reference vector has zero norm")]
    ZeroReference,

    #[error("{what} = {value} is outside the admissible range {range}")]
    Domain {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("A2 has full column rank, so its null space is trivial")]
    NullSpaceEmpty,

    #[error("expected a square matrix, got {nrows}x{ncols}")]
    NonSquare { nrows: usize, ncols: usize },

    #[error("{0}")]
    InvalidArgument(String),

    #[error(transparent)]
    MatrixMarket(#[from] MatrixMarketError),
}

#[derive(Debug, Error)]
pub enum MatrixMarketError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("unsupported matrix type: {0}")]
    Unsupported(String),

    #[error("malformed size line {line}: {text:?}")]
    MalformedSize { line: usize, text: String },

    #[error("non-numeric entry on line {line}: {text:?}")]
    InvalidEntry { line: usize, text: String },

    #[error("entry ({row}, {col}) on line {line} outside the declared {nrows}x{ncols} bounds")]
    IndexOutOfBounds {
        line: usize,
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },

    #[error("declared {declared} entries but found {found}")]
    EntryCount { declared: usize, found: usize },
}
