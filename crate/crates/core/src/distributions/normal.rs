use statrs::distribution::{Continuous, Normal};

use super::{Distribution1D, DistributionError};
use crate::numerics::{poly, PiecewisePolynomial};

/// Normal law truncated to `mean ± trunc·sd`, represented by a cubic
/// Hermite spline of the density on `segments` equal pieces and renormalized.
pub fn normal_spline(mean: f64, sd: f64, segments: usize, trunc: f64) -> Result<Distribution1D, DistributionError> {
    if !(sd > 0.0) || !mean.is_finite() || segments == 0 || !(trunc > 0.0) {
        return Err(DistributionError::NonIntegrable);
    }
    let normal = Normal::new(mean, sd).map_err(|_| DistributionError::NonIntegrable)?;
    let lo = mean - trunc * sd;
    let h = 2.0 * trunc * sd / segments as f64;
    let node = |k: usize| lo + h * k as f64;
    let f = |t: f64| normal.pdf(t);
    let df = |t: f64| -(t - mean) / (sd * sd) * normal.pdf(t);
    let mut breaks = Vec::with_capacity(segments + 1);
    let mut coeffs = Vec::with_capacity(segments);
    for k in 0..segments {
        let (a, b) = (node(k), node(k + 1));
        let (fa, fb, da, db) = (f(a), f(b), df(a), df(b));
        let c2 = (3.0 * (fb - fa) / h - 2.0 * da - db) / h;
        let c3 = (2.0 * (fa - fb) / h + da + db) / (h * h);
        // local in τ = t − a, then re-expressed in t
        coeffs.push(poly::shift(&[fa, da, c2, c3], -a));
        breaks.push(a);
    }
    breaks.push(node(segments));
    let raw = PiecewisePolynomial::new(breaks, coeffs)?;
    let mass = raw.integrate(lo, node(segments))?;
    Distribution1D::from_density(raw.scale(1.0 / mass))
}
