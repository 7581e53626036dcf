//! One-dimensional and product probability measures built from atoms and
//! piecewise-polynomial densities.

mod normal;
mod uima;
mod wasserstein;

use thiserror::Error;

use crate::numerics::piecewise::dedup_breaks;
use crate::numerics::{poly, NumericsError, PiecewisePolynomial};

pub use normal::normal_spline;
pub use uima::{gamma_alpha_transform, gamma_transform, product_gamma};
pub use wasserstein::{
    monotone_plan, optimal_transport_cost, product_coupling, wasserstein_1d, wasserstein_joint_discrete,
};

/// Total-mass tolerance.
pub const MASS_TOL: f64 = 1e-10;
/// Atoms closer than this are merged.
pub const ATOM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistributionError {
    #[error("invalid atom ({0}, {1})")]
    InvalidAtom(f64, f64),
    #[error("total mass {0} differs from 1")]
    MassNotNormalized(f64),
    #[error("density is negative near {0}")]
    NegativeDensity(f64),
    #[error("density does not have compact support")]
    NonIntegrable,
    #[error("operation requires a purely discrete distribution")]
    NotDiscrete,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty distribution")]
    Empty,
    #[error("Wasserstein order must be >= 1, got {0}")]
    InvalidOrder(f64),
    #[error("transportation problem could not be solved: {0}")]
    Transport(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Probability measure on the real line: finitely many atoms plus a density
/// with compact support.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution1D {
    atoms: Vec<(f64, f64)>,
    density: PiecewisePolynomial,
}

impl Distribution1D {
    pub fn new(atoms: Vec<(f64, f64)>, density: PiecewisePolynomial) -> Result<Self, DistributionError> {
        let mut atoms = atoms;
        for &(loc, mass) in &atoms {
            if !loc.is_finite() || !mass.is_finite() || mass <= 0.0 {
                return Err(DistributionError::InvalidAtom(loc, mass));
            }
        }
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (loc, mass) in atoms {
            match merged.last_mut() {
                Some(last) if loc - last.0 <= ATOM_TOL => last.1 += mass,
                _ => merged.push((loc, mass)),
            }
        }
        let density = density.trimmed();
        if let Some((lo, hi)) = density.support() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(DistributionError::NonIntegrable);
            }
        }
        for (lo, hi, c) in density.segments() {
            let scale = 1.0 + c.iter().fold(0.0, |a: f64, v| a.max(v.abs())) * (1.0 + lo.abs().max(hi.abs())).powi(4);
            for k in 0..=8 {
                let t = lo + (hi - lo) * k as f64 / 8.0;
                if poly::eval(c, t) < -1e-12 * scale {
                    return Err(DistributionError::NegativeDensity(t));
                }
            }
        }
        let total = merged.iter().map(|a| a.1).sum::<f64>() + density_mass(&density)?;
        if (total - 1.0).abs() > MASS_TOL {
            return Err(DistributionError::MassNotNormalized(total));
        }
        Ok(Self { atoms: merged, density })
    }

    /// Dirac measure at `loc`.
    pub fn point(loc: f64) -> Result<Self, DistributionError> {
        Self::new(vec![(loc, 1.0)], PiecewisePolynomial::zero())
    }

    pub fn discrete(atoms: &[(f64, f64)]) -> Result<Self, DistributionError> {
        Self::new(atoms.to_vec(), PiecewisePolynomial::zero())
    }

    /// Uniform weights on the given locations.
    pub fn uniform_atoms(locs: &[f64]) -> Result<Self, DistributionError> {
        if locs.is_empty() {
            return Err(DistributionError::Empty);
        }
        let w = 1.0 / locs.len() as f64;
        Self::discrete(&locs.iter().map(|&l| (l, w)).collect::<Vec<_>>())
    }

    /// Uniform law on `(a, b)`.
    pub fn uniform(a: f64, b: f64) -> Result<Self, DistributionError> {
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(DistributionError::NonIntegrable);
        }
        Self::from_density(PiecewisePolynomial::constant(a, b, 1.0 / (b - a))?)
    }

    pub fn from_density(density: PiecewisePolynomial) -> Result<Self, DistributionError> {
        Self::new(Vec::new(), density)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn density(&self) -> &PiecewisePolynomial {
        &self.density
    }

    pub fn is_discrete(&self) -> bool {
        self.density.is_empty()
    }

    /// Smallest closed interval carrying all mass.
    pub fn support(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        if let (Some(first), Some(last)) = (self.atoms.first(), self.atoms.last()) {
            lo = first.0;
            hi = last.0;
        }
        if let Some((a, b)) = self.density.support() {
            lo = lo.min(a);
            hi = hi.max(b);
        }
        (lo, hi)
    }

    /// P(ξ ≤ s).
    pub fn cdf(&self, s: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().take_while(|a| a.0 <= s).map(|a| a.1).sum();
        (atoms + self.density_cdf(s)).clamp(0.0, 1.0)
    }

    /// P(ξ < s).
    pub fn cdf_left(&self, s: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().take_while(|a| a.0 < s).map(|a| a.1).sum();
        (atoms + self.density_cdf(s)).clamp(0.0, 1.0)
    }

    fn density_cdf(&self, s: f64) -> f64 {
        match self.density.support() {
            Some((lo, _)) if s > lo => self.density.integrate(lo, s).unwrap_or(0.0),
            _ => 0.0,
        }
    }

    /// Right-continuous cdf as a piecewise polynomial (equal to 1 on the last segment).
    pub fn cdf_piecewise(&self) -> Result<PiecewisePolynomial, DistributionError> {
        let dens = self.density.antiderivative()?;
        if self.atoms.is_empty() {
            return Ok(dens);
        }
        let mut breaks: Vec<f64> = self.atoms.iter().map(|a| a.0).collect();
        breaks.push(f64::INFINITY);
        let mut acc = 0.0;
        let coeffs = self
            .atoms
            .iter()
            .map(|a| {
                acc += a.1;
                vec![acc]
            })
            .collect();
        let steps = PiecewisePolynomial::new(breaks, coeffs)?;
        Ok(dens.add(&steps))
    }

    pub fn mean(&self) -> f64 {
        let line = [0.0, 1.0];
        self.atoms.iter().map(|a| a.0 * a.1).sum::<f64>()
            + self
                .density
                .segments()
                .map(|(lo, hi, c)| integrate_poly(&poly::mul(c, &line), lo, hi))
                .sum::<f64>()
    }

    /// E[g(ξ)] for a piecewise polynomial `g` (atoms evaluated with the
    /// left-closed convention).
    pub fn expect_piecewise(&self, g: &PiecewisePolynomial) -> Result<f64, DistributionError> {
        let mut total: f64 = self.atoms.iter().map(|&(loc, w)| w * g.eval(loc)).sum();
        for (lo, hi, c) in self.density.segments() {
            for (glo, ghi, gc) in g.segments() {
                let a = lo.max(glo);
                let b = hi.min(ghi);
                if a < b {
                    total += integrate_poly(&poly::mul(c, gc), a, b);
                }
            }
        }
        Ok(total)
    }

    /// E[h(ξ)] for an `h` that is affine between consecutive `kinks` (any
    /// order). Atoms are evaluated pointwise, so `h` may jump at kinks.
    pub fn expect_piecewise_affine(&self, h: impl Fn(f64) -> f64, kinks: &[f64]) -> f64 {
        let mut total: f64 = self.atoms.iter().map(|&(loc, w)| w * h(loc)).sum();
        if self.density.is_empty() {
            return total;
        }
        let mut cuts: Vec<f64> = kinks.iter().copied().filter(|k| k.is_finite()).collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let cuts = dedup_breaks(cuts);
        for (lo, hi, c) in self.density.segments() {
            let mut pts = vec![lo];
            pts.extend(cuts.iter().copied().filter(|&k| k > lo && k < hi));
            pts.push(hi);
            for w in pts.windows(2) {
                let (a, b) = (w[0], w[1]);
                if b - a <= 0.0 {
                    continue;
                }
                let (t1, t2) = (a + (b - a) / 3.0, a + 2.0 * (b - a) / 3.0);
                let (h1, h2) = (h(t1), h(t2));
                let slope = (h2 - h1) / (t2 - t1);
                let affine = [h1 - slope * t1, slope];
                total += integrate_poly(&poly::mul(c, &affine), a, b);
            }
        }
        total
    }

    /// Lower quantile inf{s : F(s) ≥ u}, by bisection to 1e-10 with atoms snapped exactly.
    pub fn quantile(&self, u: f64) -> f64 {
        let (lo, hi) = self.support();
        if u <= 0.0 {
            return lo;
        }
        if u >= 1.0 {
            return hi;
        }
        let (mut a, mut b) = (lo, hi);
        if self.cdf(a) >= u {
            return a;
        }
        while b - a > 1e-10 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if self.cdf(mid) >= u {
                b = mid;
            } else {
                a = mid;
            }
        }
        // an atom inside the final bracket is the exact answer
        if let Some(&(loc, _)) = self.atoms.iter().find(|at| at.0 > a && at.0 <= b) {
            if self.cdf(loc) >= u {
                return loc;
            }
        }
        b
    }
}

fn integrate_poly(c: &[f64], a: f64, b: f64) -> f64 {
    let anti = poly::antiderivative(c);
    poly::eval(&anti, b) - poly::eval(&anti, a)
}

fn density_mass(d: &PiecewisePolynomial) -> Result<f64, DistributionError> {
    match d.support() {
        None => Ok(0.0),
        Some((lo, hi)) => Ok(d.integrate(lo, hi)?),
    }
}

/// Joint law with independent marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductDistribution {
    marginals: Vec<Distribution1D>,
}

impl ProductDistribution {
    pub fn new(marginals: Vec<Distribution1D>) -> Result<Self, DistributionError> {
        if marginals.is_empty() {
            return Err(DistributionError::Empty);
        }
        Ok(Self { marginals })
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[Distribution1D] {
        &self.marginals
    }

    pub fn marginal(&self, i: usize) -> &Distribution1D {
        &self.marginals[i]
    }

    pub fn is_discrete(&self) -> bool {
        self.marginals.iter().all(Distribution1D::is_discrete)
    }
}

/// Finitely supported law on ℝ^m.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDiscrete {
    points: Vec<Vec<f64>>,
    masses: Vec<f64>,
}

impl JointDiscrete {
    /// Equal points are merged; masses must sum to 1.
    pub fn new(atoms: Vec<(Vec<f64>, f64)>) -> Result<Self, DistributionError> {
        let Some(m) = atoms.first().map(|a| a.0.len()) else {
            return Err(DistributionError::Empty);
        };
        if m == 0 {
            return Err(DistributionError::Empty);
        }
        for (p, w) in &atoms {
            if p.len() != m {
                return Err(DistributionError::DimensionMismatch { expected: m, got: p.len() });
            }
            if !w.is_finite() || *w <= 0.0 || p.iter().any(|v| !v.is_finite()) {
                return Err(DistributionError::InvalidAtom(p[0], *w));
            }
        }
        let mut atoms = atoms;
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut points: Vec<Vec<f64>> = Vec::with_capacity(atoms.len());
        let mut masses: Vec<f64> = Vec::with_capacity(atoms.len());
        for (p, w) in atoms {
            if points.last() == Some(&p) {
                *masses.last_mut().unwrap() += w;
            } else {
                points.push(p);
                masses.push(w);
            }
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(DistributionError::MassNotNormalized(total));
        }
        Ok(Self { points, masses })
    }

    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self, DistributionError> {
        let w = 1.0 / points.len().max(1) as f64;
        Self::new(points.into_iter().map(|p| (p, w)).collect())
    }

    /// Product of discrete marginals.
    pub fn from_product(marginals: &[Distribution1D]) -> Result<Self, DistributionError> {
        if marginals.iter().any(|d| !d.is_discrete()) {
            return Err(DistributionError::NotDiscrete);
        }
        let mut atoms: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
        for d in marginals {
            let mut next = Vec::with_capacity(atoms.len() * d.atoms().len());
            for (p, w) in &atoms {
                for &(loc, mass) in d.atoms() {
                    let mut q = p.clone();
                    q.push(loc);
                    next.push((q, w * mass));
                }
            }
            atoms = next;
        }
        Self::new(atoms)
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Marginal law of coordinate `i`.
    pub fn projection(&self, i: usize) -> Result<Distribution1D, DistributionError> {
        let atoms = self.points.iter().zip(&self.masses).map(|(p, &w)| (p[i], w)).collect();
        Distribution1D::new(atoms, PiecewisePolynomial::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_examples() {
        let d = Distribution1D::point(0.0).unwrap();
        assert_eq!(d.cdf(-0.1), 0.0);
        assert_eq!(d.cdf(0.0), 1.0);
        let u = Distribution1D::uniform(0.0, 1.0).unwrap();
        assert!((u.cdf(0.25) - 0.25).abs() < 1e-15);
        let g = gamma_transform(&d).unwrap();
        assert!((g.cdf(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_mass_and_negative_density() {
        assert!(matches!(
            Distribution1D::discrete(&[(0.0, 0.5)]),
            Err(DistributionError::MassNotNormalized(_))
        ));
        let neg = PiecewisePolynomial::new(vec![0.0, 1.0, 2.0], vec![vec![-0.5], vec![1.5]]).unwrap();
        assert!(matches!(Distribution1D::from_density(neg), Err(DistributionError::NegativeDensity(_))));
        let tail = PiecewisePolynomial::new(vec![0.0, f64::INFINITY], vec![vec![1.0]]).unwrap();
        assert!(matches!(Distribution1D::from_density(tail), Err(DistributionError::NonIntegrable)));
    }

    #[test]
    fn merges_duplicate_atoms() {
        let d = Distribution1D::discrete(&[(1.0, 0.25), (0.0, 0.5), (1.0, 0.25)]).unwrap();
        assert_eq!(d.atoms(), &[(0.0, 0.5), (1.0, 0.5)]);
    }

    #[test]
    fn cdf_piecewise_matches_pointwise_cdf() {
        let dens = PiecewisePolynomial::constant(0.0, 2.0, 0.25).unwrap();
        let d = Distribution1D::new(vec![(0.5, 0.25), (3.0, 0.25)], dens).unwrap();
        let f = d.cdf_piecewise().unwrap();
        for i in 0..50 {
            let s = -1.0 + 0.1 * i as f64;
            assert!((f.eval(s) - d.cdf(s)).abs() < 1e-14, "s={s}");
        }
        assert_eq!(f.eval(3.0), 1.0);
    }

    #[test]
    fn quantiles() {
        let d = Distribution1D::discrete(&[(0.0, 0.3), (2.0, 0.7)]).unwrap();
        assert_eq!(d.quantile(0.3), 0.0);
        assert_eq!(d.quantile(0.31), 2.0);
        let u = Distribution1D::uniform(-1.0, 1.0).unwrap();
        assert!((u.quantile(0.75) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn joint_projection() {
        let j = JointDiscrete::uniform(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let p = j.projection(0).unwrap();
        assert_eq!(p.atoms(), &[(0.0, 0.5), (1.0, 0.5)]);
    }
}
