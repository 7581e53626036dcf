//! Numerical kernels: polynomial calculus, a dense simplex solver and
//! one-dimensional convex minimization.

pub mod lp;
pub mod optimize;
pub mod piecewise;
pub mod poly;

use thiserror::Error;

pub use lp::{lp_solve, Direction, LinearProgram, LpRow, LpSolution, LpStatus, RowSense};
pub use optimize::minimize_convex_1d;
pub use piecewise::PiecewisePolynomial;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("invalid piecewise polynomial: {0}")]
    InvalidPiecewise(String),
    #[error("polynomial degree {0} exceeds the supported maximum")]
    DegreeOverflow(usize),
    #[error("invalid interval [{0}, {1}]")]
    InvalidInterval(f64, f64),
    #[error("integral of a nonzero polynomial over an infinite segment")]
    UnboundedIntegral,
    #[error("invalid linear program: {0}")]
    InvalidModel(String),
    #[error("numerically singular basis")]
    SingularBasis,
    #[error("simplex iteration limit reached after {0} iterations")]
    IterationLimit(usize),
}

/// Exact integral of a piecewise polynomial over `[a, b]`.
pub fn poly_integrate(f: &PiecewisePolynomial, a: f64, b: f64) -> Result<f64, NumericsError> {
    f.integrate(a, b)
}
