//! Sparse and dense linear-algebra substrate.

pub mod cholesky;
pub mod csr;
pub mod mtx;
pub mod vector;

pub use cholesky::{cholesky_factor, cholesky_factor_with_threshold, CholeskyFactor};
pub use csr::SparseMatrix;
pub use mtx::{parse_matrix_market, read_matrix_market, write_matrix_market};
