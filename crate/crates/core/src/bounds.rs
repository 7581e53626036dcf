//! Stability and approximation-error bounds for simple integer recourse,
//! and the comparison reports built from them.

use thiserror::Error;

use crate::distributions::{
    gamma_alpha_transform, gamma_transform, wasserstein_1d, Distribution1D, DistributionError, ProductDistribution,
};
use crate::dro::{pragmatic_drsir_p1, DroError, WassersteinBall};
use crate::numerics::{poly, PiecewisePolynomial};
use crate::sir::{expected_recourse_1d, CostVector, RecourseVariant, SirError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Sir(#[from] SirError),
    #[error(transparent)]
    Dro(#[from] DroError),
}

/// One-dimensional stability bound: ‖q‖∞√(2ε) up to ε = 1/2, then ‖q‖∞(ε + 1/2).
pub fn bound_g(qinf: f64, eps: f64) -> f64 {
    if eps <= 0.5 {
        qinf * (2.0 * eps).sqrt()
    } else {
        qinf * (eps + 0.5)
    }
}

fn norms(qbar: &[f64]) -> (f64, f64) {
    let two = qbar.iter().map(|v| v * v).sum::<f64>().sqrt();
    let inf = qbar.iter().copied().fold(0.0, f64::max);
    (two, inf)
}

/// Multivariate stability bound with per-dimension weights q̄ᵢ = max(qᵢ⁺, qᵢ⁻).
pub fn bound_big_g(qbar: &[f64], eps: f64) -> f64 {
    let (two, inf) = norms(qbar);
    if inf == 0.0 {
        return 0.0;
    }
    let knee = 0.5 * two * two / (inf * inf);
    if eps <= knee {
        two * (2.0 * eps).sqrt()
    } else {
        two * (2.0 * knee).sqrt() + inf * (eps - knee)
    }
}

/// [`bound_big_g`] minus the linear reward ‖q̄‖∞ε.
pub fn bound_big_g_star(qbar: &[f64], eps: f64) -> f64 {
    bound_big_g(qbar, eps) - norms(qbar).1 * eps
}

/// t/8 up to t = 4, then 1 − 2/t; 1 at infinity.
pub fn h_tv(t: f64) -> f64 {
    if t.is_infinite() {
        1.0
    } else if t <= 4.0 {
        t / 8.0
    } else {
        1.0 - 2.0 / t
    }
}

/// Σᵢ (qᵢ⁺ + qᵢ⁻)·H(tvᵢ) for independent marginals.
pub fn bound_h_tv(qsum: &[f64], tv: &[f64]) -> Result<f64, BoundsError> {
    if qsum.len() != tv.len() {
        return Err(BoundsError::InvalidInput(format!("{} weights for {} total variations", qsum.len(), tv.len())));
    }
    Ok(qsum.iter().zip(tv).map(|(q, t)| q * h_tv(*t)).sum())
}

/// Total variation of the density: jumps (including the drops to zero at
/// the support ends) plus ∫|f′| per segment. Infinite when there are atoms.
pub fn total_variation(d: &Distribution1D) -> f64 {
    if !d.atoms().is_empty() {
        return f64::INFINITY;
    }
    let f = d.density();
    let mut tv = 0.0;
    for &b in f.breakpoints() {
        tv += (f.eval(b) - f.eval_left(b)).abs();
    }
    for (a, b, c) in f.segments() {
        let mut pts = vec![a];
        pts.extend(poly::roots_in(&poly::derivative(c), a, b));
        pts.push(b);
        tv += pts.windows(2).map(|w| (poly::eval(c, w[1]) - poly::eval(c, w[0])).abs()).sum::<f64>();
    }
    tv
}

/// Which convex approximation the error bound is about.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConvexApprox {
    /// Shifted LP-relaxation: the reference smoothed by unit-interval averaging.
    ShiftedLp,
    /// α-approximation: mass of each cell [α + k, α + k + 1) spread uniformly over the cell.
    Alpha(f64),
}

impl ConvexApprox {
    pub fn apply(self, d: &Distribution1D) -> Result<Distribution1D, DistributionError> {
        match self {
            ConvexApprox::ShiftedLp => gamma_transform(d),
            ConvexApprox::Alpha(a) => gamma_alpha_transform(d, a),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub case: String,
    /// Σᵢ W₁ between each marginal and its approximation.
    pub wasserstein_distance: f64,
    pub bound_wass: f64,
    pub bound_tv: Option<f64>,
    pub empirical_gap: Option<f64>,
}

impl BoundReport {
    pub const CSV_HEADER: [&'static str; 5] = ["case", "W1", "bound_wass", "bound_tv", "empirical_gap"];

    /// Fields in header order with 17 significant digits; missing values are empty.
    pub fn csv_record(&self) -> [String; 5] {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        [
            self.case.clone(),
            format!("{:.16e}", self.wasserstein_distance),
            format!("{:.16e}", self.bound_wass),
            opt(self.bound_tv),
            opt(self.empirical_gap),
        ]
    }
}

/// sup over x of |E_P v(ξᵢ − x) − E_approx v(ξᵢ − x)| per dimension, split
/// into the largest positive and negative parts, on a 1e-2 grid over the
/// support hull ± 2 refined tenfold around the extremes.
fn gap_extremes(qp: f64, qm: f64, d: &Distribution1D, approx: &Distribution1D) -> (f64, f64) {
    let gap = |x: f64| {
        expected_recourse_1d(qp, qm, d, x, RecourseVariant::Exact)
            - expected_recourse_1d(qp, qm, approx, x, RecourseVariant::Exact)
    };
    let (lo, hi) = d.support();
    let (lo, hi) = (lo.min(approx.support().0) - 2.0, hi.max(approx.support().1) + 2.0);
    let scan = |a: f64, b: f64, h: f64| -> ((f64, f64), (f64, f64)) {
        let n = ((b - a) / h).ceil() as usize;
        let mut best_hi = (a, f64::NEG_INFINITY);
        let mut best_lo = (a, f64::INFINITY);
        for k in 0..=n {
            let x = (a + h * k as f64).min(b);
            let v = gap(x);
            if v > best_hi.1 {
                best_hi = (x, v);
            }
            if v < best_lo.1 {
                best_lo = (x, v);
            }
        }
        (best_hi, best_lo)
    };
    let (top, bottom) = scan(lo, hi, 1e-2);
    let (top_fine, _) = scan(top.0 - 1e-2, top.0 + 1e-2, 1e-3);
    let (_, bottom_fine) = scan(bottom.0 - 1e-2, bottom.0 + 1e-2, 1e-3);
    (top.1.max(top_fine.1), bottom.1.min(bottom_fine.1))
}

/// Wasserstein error bound G(Σᵢ W₁(Pᵢ, approx(Pᵢ))) for a convex
/// approximation, next to the total-variation bound and optionally the
/// observed sup-gap of the expected recourse.
pub fn error_bound_convex_approx(
    case: &str,
    q: &CostVector,
    p: &ProductDistribution,
    approx: ConvexApprox,
    empirical: bool,
) -> Result<BoundReport, BoundsError> {
    if q.dim() != p.dim() {
        return Err(SirError::DimensionMismatch { expected: q.dim(), got: p.dim() }.into());
    }
    let mut w1 = 0.0;
    let mut tv = Vec::with_capacity(q.dim());
    let mut approximations = Vec::with_capacity(q.dim());
    for d in p.marginals() {
        let a = approx.apply(d)?;
        w1 += wasserstein_1d(d, &a, 1.0)?;
        tv.push(total_variation(d));
        approximations.push(a);
    }
    let bound_wass = bound_big_g(&q.qbar(), w1);
    let bound_tv = bound_h_tv(&q.qsum(), &tv)?;
    let empirical_gap = empirical.then(|| {
        let (mut top, mut bottom) = (0.0, 0.0);
        for i in 0..q.dim() {
            let (qp, qm) = q.pair(i);
            let (t, b) = gap_extremes(qp, qm, p.marginal(i), &approximations[i]);
            top += t;
            bottom += b;
        }
        f64::max(top, -bottom).max(0.0)
    });
    Ok(BoundReport {
        case: case.to_string(),
        wasserstein_distance: w1,
        bound_wass,
        bound_tv: Some(bound_tv),
        empirical_gap,
    })
}

/// Lower and upper bounds on the standard worst case over a type-1 ball in
/// terms of the smoothed worst case:
/// [Q̂ − ‖q‖∞W, Q̂ + G*(ε + W) + ‖q‖∞W], W = Σᵢ W₁(P₀ᵢ, smoothed P₀ᵢ).
pub fn drsir_sandwich(q: &CostVector, ball: &WassersteinBall, x: &[f64]) -> Result<(f64, f64), BoundsError> {
    let hat = pragmatic_drsir_p1(q, ball, x)?;
    let mut w = 0.0;
    for d in ball.reference().marginals() {
        w += wasserstein_1d(d, &gamma_transform(d)?, 1.0)?;
    }
    let qinf = q.qinf();
    Ok((hat - qinf * w, hat + bound_big_g_star(&q.qbar(), ball.eps() + w) + qinf * w))
}

/// Density 2 on the even dyadic cells (2k·2⁻ⁿ, (2k+1)·2⁻ⁿ) of (0, 1):
/// total variation 2ⁿ⁺¹, and W₁ to the 0-approximation 2⁻ⁿ⁻¹.
pub fn dyadic_family(n: u32) -> Result<Distribution1D, BoundsError> {
    if n == 0 || n > 20 {
        return Err(BoundsError::InvalidInput(format!("dyadic level {n} must lie in 1..=20")));
    }
    let w = 0.5f64.powi(n as i32);
    let cells = 1usize << (n - 1);
    let mut breaks = Vec::with_capacity(2 * cells + 1);
    let mut coeffs = Vec::with_capacity(2 * cells);
    for k in 0..cells {
        breaks.push(2.0 * k as f64 * w);
        breaks.push((2.0 * k as f64 + 1.0) * w);
        coeffs.push(vec![2.0]);
        coeffs.push(vec![0.0]);
    }
    breaks.push(1.0);
    let density = PiecewisePolynomial::new(breaks, coeffs).map_err(DistributionError::from)?;
    Ok(Distribution1D::from_density(density)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_examples() {
        assert_eq!(bound_g(2.0, 0.5), 2.0);
        assert_eq!(bound_g(2.0, 0.0), 0.0);
        assert_eq!(bound_g(2.0, 1.0), 3.0);
    }

    #[test]
    fn big_g_examples() {
        assert!((bound_big_g(&[2.0], 0.3) - 2.0 * 0.6f64.sqrt()).abs() < 1e-12);
        assert!((bound_big_g(&[3.0, 4.0], 0.5) - 5.0).abs() < 1e-12);
        assert!((bound_big_g(&[3.0, 4.0], 1.0) - 7.125).abs() < 1e-12);
        assert_eq!(bound_big_g_star(&[2.0], 0.0), 0.0);
        assert!((bound_big_g_star(&[2.0], 0.5) - 1.0).abs() < 1e-12);
        assert!((bound_big_g_star(&[2.0], 7.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn h_examples() {
        assert_eq!(h_tv(4.0), 0.5);
        assert_eq!(h_tv(f64::INFINITY), 1.0);
        assert_eq!(bound_h_tv(&[2.0], &[f64::INFINITY]).unwrap(), 2.0);
    }

    #[test]
    fn uniform_cell_total_variation() {
        let d = Distribution1D::uniform(0.0, 1.0).unwrap();
        assert_eq!(total_variation(&d), 2.0);
        assert_eq!(h_tv(total_variation(&d)), 0.25);
    }

    #[test]
    fn dyadic_variation_and_distance() {
        for n in 1..6 {
            let d = dyadic_family(n).unwrap();
            assert!((total_variation(&d) - 2f64.powi(n as i32 + 1)).abs() < 1e-9);
            let g = gamma_alpha_transform(&d, 0.0).unwrap();
            assert!((wasserstein_1d(&d, &g, 1.0).unwrap() - 0.5f64.powi(n as i32 + 1)).abs() < 1e-12);
        }
    }
}
