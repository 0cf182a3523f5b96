//! Sparse matrices, the quasi-definite `LDLᵀ` factorization and conjugate
//! gradient.

mod cg;
mod ldl;
mod sparse;

pub use cg::{cg_solve, CgResult};
pub use ldl::{build_kkt, ldl_factor, ldl_solve, LdlFactorization, Ordering};
pub use sparse::SparseMatrix;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid sparse matrix: {0}")]
    InvalidMatrix(String),
    #[error("zero pivot at position {0}; matrix is not quasi-definite")]
    ZeroPivot(usize),
    #[error("fill-reducing ordering failed: {0}")]
    Ordering(String),
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    crate::cones::norm(a)
}
