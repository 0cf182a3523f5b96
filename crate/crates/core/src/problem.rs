use crate::cones::{ConeError, ConeSpec};
use crate::linalg::SparseMatrix;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("b has length {got}, A has {expected} rows")]
    BLength { expected: usize, got: usize },
    #[error("c has length {got}, A has {expected} columns")]
    CLength { expected: usize, got: usize },
    #[error("cone dimensions sum to {cone}, A has {rows} rows")]
    ConeDim { cone: usize, rows: usize },
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

/// Data of the standard-form cone program: sparse `A` (m×n), `b` (m),
/// `c` (n) and the cone `K` with `total_dim = m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemData {
    pub a: SparseMatrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub cone: ConeSpec,
}

impl ProblemData {
    pub fn new(a: SparseMatrix, b: Vec<f64>, c: Vec<f64>, cone: ConeSpec) -> Result<Self, ProblemError> {
        let data = ProblemData { a, b, c, cone };
        data.validate()?;
        Ok(data)
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        let (m, n) = (self.a.nrows(), self.a.ncols());
        if self.b.len() != m {
            return Err(ProblemError::BLength { expected: m, got: self.b.len() });
        }
        if self.c.len() != n {
            return Err(ProblemError::CLength { expected: n, got: self.c.len() });
        }
        self.cone.validate()?;
        if self.cone.total_dim() != m {
            return Err(ProblemError::ConeDim { cone: self.cone.total_dim(), rows: m });
        }
        if self.b.iter().any(|v| !v.is_finite()) {
            return Err(ProblemError::NonFinite("b"));
        }
        if self.c.iter().any(|v| !v.is_finite()) {
            return Err(ProblemError::NonFinite("c"));
        }
        if self.a.vals().iter().any(|v| !v.is_finite()) {
            return Err(ProblemError::NonFinite("A"));
        }
        Ok(())
    }

    /// Number of primal variables.
    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    /// Number of constraints.
    pub fn m(&self) -> usize {
        self.a.nrows()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mismatched_cone_is_rejected() {
        let a = SparseMatrix::identity(2);
        let err = ProblemData::new(a, vec![0.0; 2], vec![0.0; 2], ConeSpec::nonneg(3)).unwrap_err();
        assert_eq!(err, ProblemError::ConeDim { cone: 3, rows: 2 });
    }

    #[test]
    fn mismatched_vectors_are_rejected() {
        let a = SparseMatrix::identity(2);
        assert!(ProblemData::new(a.clone(), vec![0.0], vec![0.0; 2], ConeSpec::nonneg(2)).is_err());
        assert!(ProblemData::new(a, vec![0.0; 2], vec![f64::NAN; 2], ConeSpec::nonneg(2)).is_err());
    }
}
