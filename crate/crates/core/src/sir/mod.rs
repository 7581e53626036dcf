//! Simple integer recourse: value functions, expected recourse and the
//! first-stage problem over a box.

mod first_stage;
pub mod value;

use thiserror::Error;

use crate::distributions::{Distribution1D, DistributionError, ProductDistribution};
use crate::numerics::NumericsError;

pub(crate) use first_stage::{argmin_smallest, effective_bracket};
pub use first_stage::{solve_first_stage, FirstStageProblem, FirstStageSolution, FirstStageVariant};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SirError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid cost pair ({0}, {1}): entries must be finite and nonnegative")]
    InvalidCost(f64, f64),
    #[error("invalid box [{0}, {1}]")]
    InvalidBox(f64, f64),
    #[error("non-finite input {0}")]
    NonFinite(f64),
    #[error("objective is unbounded below in dimension {0}")]
    Unbounded(usize),
    #[error("variant requires a finite box in dimension {0}")]
    NeedsFiniteBox(usize),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Per-dimension surplus and shortage unit costs.
#[derive(Debug, Clone, PartialEq)]
pub struct CostVector {
    plus: Vec<f64>,
    minus: Vec<f64>,
}

impl CostVector {
    pub fn new(pairs: &[(f64, f64)]) -> Result<Self, SirError> {
        if pairs.is_empty() {
            return Err(SirError::DimensionMismatch { expected: 1, got: 0 });
        }
        for &(p, m) in pairs {
            if !(p.is_finite() && m.is_finite() && p >= 0.0 && m >= 0.0) {
                return Err(SirError::InvalidCost(p, m));
            }
        }
        Ok(Self { plus: pairs.iter().map(|p| p.0).collect(), minus: pairs.iter().map(|p| p.1).collect() })
    }

    pub fn dim(&self) -> usize {
        self.plus.len()
    }

    pub fn plus(&self, i: usize) -> f64 {
        self.plus[i]
    }

    pub fn minus(&self, i: usize) -> f64 {
        self.minus[i]
    }

    pub fn pair(&self, i: usize) -> (f64, f64) {
        (self.plus[i], self.minus[i])
    }

    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.plus.iter().copied().zip(self.minus.iter().copied()).collect()
    }

    /// max(q_i⁺, q_i⁻) per dimension.
    pub fn qbar(&self) -> Vec<f64> {
        self.plus.iter().zip(&self.minus).map(|(a, b)| a.max(*b)).collect()
    }

    /// q_i⁺ + q_i⁻ per dimension.
    pub fn qsum(&self) -> Vec<f64> {
        self.plus.iter().zip(&self.minus).map(|(a, b)| a + b).collect()
    }

    /// Largest entry over all dimensions.
    pub fn qinf(&self) -> f64 {
        self.qbar().into_iter().fold(0.0, f64::max)
    }

    /// Dimensions where q_i⁺ + q_i⁻ = 0 (the recourse is identically zero there).
    pub fn degenerate_dims(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.plus[i] + self.minus[i] == 0.0).collect()
    }
}

/// Which recourse function an expectation is taken of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecourseVariant {
    Exact,
    Usc,
    Hat,
    Lp,
}

impl RecourseVariant {
    pub fn eval(self, qp: f64, qm: f64, t: f64) -> f64 {
        match self {
            RecourseVariant::Exact => value::exact(qp, qm, t),
            RecourseVariant::Usc => value::usc(qp, qm, t),
            RecourseVariant::Hat => value::hat(qp, qm, t),
            RecourseVariant::Lp => value::lp(qp, qm, t),
        }
    }
}

fn check_dims(q: &CostVector, a: &[f64], b: &[f64]) -> Result<(), SirError> {
    for v in [a, b] {
        if v.len() != q.dim() {
            return Err(SirError::DimensionMismatch { expected: q.dim(), got: v.len() });
        }
        if let Some(&bad) = v.iter().find(|x| !x.is_finite()) {
            return Err(SirError::NonFinite(bad));
        }
    }
    Ok(())
}

fn sum_variant(q: &CostVector, xi: &[f64], x: &[f64], variant: RecourseVariant) -> Result<f64, SirError> {
    check_dims(q, xi, x)?;
    Ok((0..q.dim()).map(|i| variant.eval(q.plus[i], q.minus[i], xi[i] - x[i])).sum())
}

/// Σᵢ q_i⁺⌈ξᵢ−xᵢ⌉⁺ + q_i⁻⌊ξᵢ−xᵢ⌋⁻.
pub fn value(q: &CostVector, xi: &[f64], x: &[f64]) -> Result<f64, SirError> {
    sum_variant(q, xi, x, RecourseVariant::Exact)
}

/// Upper semicontinuous envelope of [`value`].
pub fn value_usc(q: &CostVector, xi: &[f64], x: &[f64]) -> Result<f64, SirError> {
    sum_variant(q, xi, x, RecourseVariant::Usc)
}

/// Convex smoothed value Σᵢ q_i⁺(ξᵢ−xᵢ+1/2)⁺ + q_i⁻(ξᵢ−xᵢ−1/2)⁻.
pub fn value_hat(q: &CostVector, xi: &[f64], x: &[f64]) -> Result<f64, SirError> {
    sum_variant(q, xi, x, RecourseVariant::Hat)
}

/// Continuous relaxation Σᵢ q_i⁺(ξᵢ−xᵢ)⁺ + q_i⁻(ξᵢ−xᵢ)⁻.
pub fn value_lp(q: &CostVector, xi: &[f64], x: &[f64]) -> Result<f64, SirError> {
    sum_variant(q, xi, x, RecourseVariant::Lp)
}

/// `value − value_lp`.
pub fn psi(q: &CostVector, xi: &[f64], x: &[f64]) -> Result<f64, SirError> {
    Ok(value(q, xi, x)? - value_lp(q, xi, x)?)
}

/// Breakpoints of the variant's recourse, as locations of ξ, covering `[lo, hi]`.
pub(crate) fn variant_kinks(variant: RecourseVariant, x: f64, lo: f64, hi: f64) -> Vec<f64> {
    match variant {
        RecourseVariant::Hat => vec![x - 0.5, x + 0.5],
        _ => {
            let k0 = (lo - x).floor() as i64 - 1;
            let k1 = (hi - x).ceil() as i64 + 1;
            (k0..=k1).map(|k| x + k as f64).collect()
        }
    }
}

/// E[v_i(ξ_i, x_i)] for one marginal.
pub fn expected_recourse_1d(qp: f64, qm: f64, d: &Distribution1D, x: f64, variant: RecourseVariant) -> f64 {
    let (lo, hi) = d.support();
    let kinks = variant_kinks(variant, x, lo, hi);
    d.expect_piecewise_affine(|s| variant.eval(qp, qm, s - x), &kinks)
}

/// Q(x) = Σᵢ E[vᵢ(ξᵢ, xᵢ)] with exact piecewise integration per marginal.
pub fn expected_recourse(
    q: &CostVector,
    p: &ProductDistribution,
    x: &[f64],
    variant: RecourseVariant,
) -> Result<f64, SirError> {
    if p.dim() != q.dim() {
        return Err(SirError::DimensionMismatch { expected: q.dim(), got: p.dim() });
    }
    check_dims(q, x, x)?;
    Ok((0..q.dim()).map(|i| expected_recourse_1d(q.plus[i], q.minus[i], p.marginal(i), x[i], variant)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::gamma_transform;

    fn one(qp: f64, qm: f64) -> CostVector {
        CostVector::new(&[(qp, qm)]).unwrap()
    }

    #[test]
    fn vector_examples() {
        let q = one(2.0, 1.0);
        assert_eq!(value(&q, &[1.5], &[1.0]).unwrap(), 2.0);
        assert_eq!(value_usc(&q, &[1.0], &[1.0]).unwrap(), 2.0);
        assert_eq!(value_hat(&q, &[-10.0], &[0.0]).unwrap(), 10.5);
        assert!(matches!(value(&q, &[1.0, 2.0], &[0.0]), Err(SirError::DimensionMismatch { .. })));
        assert!(CostVector::new(&[(-1.0, 0.0)]).is_err());
    }

    #[test]
    fn uniform_cell_expectation() {
        let a = 0.37;
        let p = ProductDistribution::new(vec![Distribution1D::uniform(a, a + 1.0).unwrap()]).unwrap();
        let v = expected_recourse(&one(3.0, 0.0), &p, &[a], RecourseVariant::Exact).unwrap();
        assert!((v - 3.0).abs() < 1e-12);
    }

    #[test]
    fn hat_at_atom() {
        let p = ProductDistribution::new(vec![Distribution1D::point(1.3).unwrap()]).unwrap();
        assert_eq!(expected_recourse(&one(2.0, 0.0), &p, &[1.3], RecourseVariant::Hat).unwrap(), 1.0);
    }

    #[test]
    fn smoothing_identity_small() {
        let d = Distribution1D::discrete(&[(0.2, 0.5), (1.9, 0.25), (-0.7, 0.25)]).unwrap();
        let g = gamma_transform(&d).unwrap();
        for &x in &[0.0, 0.33, -1.1] {
            let lhs = expected_recourse_1d(2.0, 1.5, &g, x, RecourseVariant::Exact);
            let rhs = expected_recourse_1d(2.0, 1.5, &d, x, RecourseVariant::Hat);
            assert!((lhs - rhs).abs() < 1e-12, "{lhs} {rhs}");
        }
    }
}
