//! A first-order solver for convex cone programs
//!
//! ```text
//! minimize    cᵀx                 maximize    −bᵀy
//! subject to  Ax + s = b          subject to  −Aᵀy + r = c
//!             s ∈ K                           (r, y) ∈ {0}ⁿ × K*
//! ```
//!
//! The solver runs an operator-splitting iteration on the homogeneous
//! self-dual embedding of this primal-dual pair. Every iteration costs one
//! linear solve with a fixed quasi-definite matrix (factored once, or solved
//! approximately by conjugate gradient) plus one projection onto the cone.
//! It returns either an approximately optimal primal-dual point or a
//! certificate of primal or dual infeasibility.
//!
//! ```
//! use splitcone::{solve, ConeSpec, ProblemData, Settings, SparseMatrix, Status};
//!
//! // minimize x subject to x >= 1, written as -x + s = -1, s >= 0.
//! let a = SparseMatrix::from_triplets(1, 1, &[(0, 0, -1.0)]).unwrap();
//! let data = ProblemData::new(a, vec![-1.0], vec![1.0], ConeSpec::nonneg(1)).unwrap();
//! let sol = solve(&data, &Settings::default()).unwrap();
//! assert_eq!(sol.status, Status::Solved);
//! assert!((sol.x.unwrap()[0] - 1.0).abs() < 1e-2);
//! ```
//!
//! Cone blocks, the packed semidefinite convention, the iteration and the
//! stopping rules are described chapter by chapter in the guide under
//! `book/`.

pub mod check;
pub mod cones;
pub mod embedding;
pub mod io;
pub mod linalg;
pub mod probgen;
pub mod problem;
pub mod scaling;
pub mod solver;

#[cfg(doctest)]
mod book;

pub use cones::ConeSpec;
pub use linalg::SparseMatrix;
pub use problem::{ProblemData, ProblemError};
pub use solver::{solve, LinsysMode, Settings, Solution, SolveError, Solver, SolverState, Status, WarmStart};
