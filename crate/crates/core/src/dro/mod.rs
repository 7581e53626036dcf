//! Distributionally robust simple integer recourse over Wasserstein balls
//! and marginal moment sets.

pub mod moment;
mod oracle;
mod rowgen;
mod wasserstein;

use thiserror::Error;

use crate::distributions::{DistributionError, ProductDistribution};
use crate::numerics::NumericsError;
use crate::sir::SirError;

pub use oracle::{worst_case_oracle, GridSpec, OracleResult, OracleVariant, Sense};
pub use rowgen::{pragmatic_drsir_rowgen, solve_first_stage_rowgen, DualCertificate, RowGenIteration};
pub use wasserstein::{
    nu_kinks_1d, nu_lambda, nu_lambda_1d, pragmatic_drsir_p1, r_lambda, r_lambda_1d, solve_first_stage_large_eps,
    solve_first_stage_pragmatic_w1, standard_drsir_large_eps,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DroError {
    #[error("invalid ambiguity set: {0}")]
    InvalidBall(String),
    #[error("multiplier {lambda} is below the dual threshold {needed}")]
    LambdaBelowThreshold { lambda: f64, needed: f64 },
    #[error("large-radius closed form needs eps^p >= {needed}, got {got}; use the worst-case oracle instead")]
    RadiusTooSmall { needed: f64, got: f64 },
    #[error("operation is defined for p = 1 only, got p = {0}")]
    OrderNotOne(f64),
    #[error("reference distribution must be discrete")]
    NotDiscrete,
    #[error("no convergence after {iterations} iterations (remaining violation {gap:e})")]
    NonConvergence { iterations: usize, gap: f64 },
    #[error("linear program failed: {0}")]
    Lp(String),
    #[error("grid too coarse: value {coarse} changes to {refined} on refinement")]
    GridTooCoarse { coarse: f64, refined: f64 },
    #[error("moment conditions in dimension {0} admit no distribution on the support")]
    InfeasibleMoments(usize),
    #[error("moment dual in dimension {0} is unbounded")]
    MasterUnbounded(usize),
    #[error(transparent)]
    Sir(#[from] SirError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Closed ball of radius `eps` around `reference` in the type-`p`
/// Wasserstein distance with the separable cost Σᵢ|sᵢ − s̄ᵢ|^p.
#[derive(Debug, Clone, PartialEq)]
pub struct WassersteinBall {
    reference: ProductDistribution,
    p: f64,
    eps: f64,
}

impl WassersteinBall {
    pub fn new(reference: ProductDistribution, p: f64, eps: f64) -> Result<Self, DroError> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(DroError::InvalidBall(format!("order p = {p} must be a finite number >= 1")));
        }
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(DroError::InvalidBall(format!("radius {eps} must be finite and >= 0")));
        }
        Ok(Self { reference, p, eps })
    }

    pub fn reference(&self) -> &ProductDistribution {
        &self.reference
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn dim(&self) -> usize {
        self.reference.dim()
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self, DroError> {
        Self::new(self.reference.clone(), self.p, eps)
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<(), DroError> {
    if expected != got {
        return Err(SirError::DimensionMismatch { expected, got }.into());
    }
    Ok(())
}
