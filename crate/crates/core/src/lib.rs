//! Iterative solvers for indefinite least squares problems
//!
//! ```text
//! min_x (b - Ax)^T J (b - Ax),   A = [A1; A2],  J = diag(I_p, -I_q)
//! ```
//!
//! built around a parameterized block splitting (PBS) of the augmented
//! system
//!
//! ```text
//! [ P    0     I ] [ x  ]   [ A1^T b1 ]
//! [ A2   I     0 ] [ d2 ] = [ b2      ]      P = A1^T A1
//! [ 0   -A2^T  I ] [ d1 ]   [ 0       ]
//! ```
//!
//! The crate provides the stationary PBS iteration, the induced left
//! preconditioner for GMRES, the block-splitting preconditioners BS1-BS3 of
//! the three-by-three formulation, closed-form spectral analysis of the
//! iteration (convergence interval, optimal parameter, convergence factor)
//! and problem generators used by the benchmark CLI.

pub mod error;
pub mod experiments;
pub mod krylov;
pub mod pbs;
pub mod problem;
pub mod report;
pub mod sparse;
pub mod spectral;

pub use error::{Error, MatrixMarketError, Result};
pub use krylov::{gmres, GmresConfig, GmresOutcome, LinearOperator, Preconditioner};
pub use pbs::{pbs_iterate, BsKind, BsPreconditioner, PbsIteration, PbsOutcome, PbsPreconditioner};
pub use problem::{BlockKind, BlockOperator, IlsProblem};
pub use report::{SolveReport, Termination};
pub use sparse::{CholeskyFactor, SparseMatrix};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeDoctests;
