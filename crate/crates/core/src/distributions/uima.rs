//! Unit-interval moving average and cell-uniform smoothing of distributions.

use super::{Distribution1D, DistributionError, ProductDistribution};
use crate::numerics::piecewise::dedup_breaks;
use crate::numerics::{NumericsError, PiecewisePolynomial};

/// Highest input density degree accepted by the smoothing transforms.
const MAX_INPUT_DEGREE: usize = 3;

fn check_degree(d: &Distribution1D) -> Result<(), DistributionError> {
    let deg = d.density().degree();
    if deg > MAX_INPUT_DEGREE {
        return Err(NumericsError::DegreeOverflow(deg + 1).into());
    }
    Ok(())
}

/// Sum of unit boxes of height `w` centred at each atom.
fn atom_boxes(atoms: &[(f64, f64)]) -> Result<PiecewisePolynomial, DistributionError> {
    if atoms.is_empty() {
        return Ok(PiecewisePolynomial::zero());
    }
    let mut events: Vec<(f64, f64)> = Vec::with_capacity(2 * atoms.len());
    for &(loc, w) in atoms {
        events.push((loc - 0.5, w));
        events.push((loc + 0.5, -w));
    }
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let breaks = dedup_breaks(events.iter().map(|e| e.0).collect());
    let mut coeffs = Vec::with_capacity(breaks.len().saturating_sub(1));
    let mut level = 0.0;
    let mut k = 0;
    for w in breaks.windows(2) {
        while k < events.len() && events[k].0 < w[1] {
            level += events[k].1;
            k += 1;
        }
        coeffs.push(vec![level.max(0.0)]);
    }
    Ok(PiecewisePolynomial::new(breaks, coeffs)?)
}

/// Law of ξ + U with U uniform on (−1/2, 1/2) independent of ξ: the density
/// is t ↦ F(t + 1/2) − F(t − 1/2).
pub fn gamma_transform(d: &Distribution1D) -> Result<Distribution1D, DistributionError> {
    check_degree(d)?;
    let smoothed = d.density().unit_average()?;
    let boxes = atom_boxes(d.atoms())?;
    Distribution1D::from_density(smoothed.add(&boxes).trimmed())
}

/// Spreads the mass of every cell [α+k, α+k+1) uniformly over that cell.
pub fn gamma_alpha_transform(d: &Distribution1D, alpha: f64) -> Result<Distribution1D, DistributionError> {
    check_degree(d)?;
    if !alpha.is_finite() {
        return Err(DistributionError::InvalidAtom(alpha, 0.0));
    }
    let (lo, hi) = d.support();
    let k_lo = (lo - alpha).floor() as i64;
    let k_hi = (hi - alpha).floor() as i64;
    let cells = (k_hi - k_lo + 1) as usize;
    let mut mass = vec![0.0; cells];
    for &(loc, w) in d.atoms() {
        let k = ((loc - alpha).floor() as i64 - k_lo) as usize;
        mass[k.min(cells - 1)] += w;
    }
    let mut breaks = Vec::with_capacity(cells + 1);
    for i in 0..=cells {
        breaks.push(alpha + (k_lo + i as i64) as f64);
    }
    if !d.density().is_empty() {
        for (i, m) in mass.iter_mut().enumerate() {
            *m += d.density().integrate(breaks[i], breaks[i + 1])?;
        }
    }
    let coeffs = mass.into_iter().map(|m| vec![m]).collect();
    Distribution1D::from_density(PiecewisePolynomial::new(breaks, coeffs)?.trimmed())
}

/// Applies [`gamma_transform`] to every marginal.
pub fn product_gamma(p: &ProductDistribution) -> Result<ProductDistribution, DistributionError> {
    ProductDistribution::new(p.marginals().iter().map(gamma_transform).collect::<Result<_, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn same_density(a: &Distribution1D, f: impl Fn(f64) -> f64) {
        for i in 0..=200 {
            let t = -2.0 + 0.0213 * i as f64;
            assert!((a.density().eval(t) - f(t)).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn point_mass_becomes_unit_box() {
        let g = gamma_transform(&Distribution1D::point(0.7).unwrap()).unwrap();
        assert!(g.atoms().is_empty());
        same_density(&g, |t| if (0.2..1.2).contains(&t) { 1.0 } else { 0.0 });
    }

    #[test]
    fn uniform_becomes_triangle() {
        let g = gamma_transform(&Distribution1D::uniform(0.0, 1.0).unwrap()).unwrap();
        same_density(&g, |t| {
            if (-0.5..0.5).contains(&t) {
                t + 0.5
            } else if (0.5..1.5).contains(&t) {
                1.5 - t
            } else {
                0.0
            }
        });
    }

    #[test]
    fn two_atoms_give_flat_half() {
        let g = gamma_transform(&Distribution1D::uniform_atoms(&[0.0, 1.0]).unwrap()).unwrap();
        same_density(&g, |t| if (-0.5..1.5).contains(&t) { 0.5 } else { 0.0 });
    }

    #[test]
    fn alpha_transform_examples() {
        let p = Distribution1D::point(0.3).unwrap();
        let g0 = gamma_alpha_transform(&p, 0.0).unwrap();
        same_density(&g0, |t| if (0.0..1.0).contains(&t) { 1.0 } else { 0.0 });
        let g5 = gamma_alpha_transform(&p, 0.5).unwrap();
        same_density(&g5, |t| if (-0.5..0.5).contains(&t) { 1.0 } else { 0.0 });
        let u = Distribution1D::uniform(0.0, 1.0).unwrap();
        let gu = gamma_alpha_transform(&u, 0.0).unwrap();
        same_density(&gu, |t| if (0.0..1.0).contains(&t) { 1.0 } else { 0.0 });
    }

    #[test]
    fn degree_cap() {
        let quartic = PiecewisePolynomial::new(vec![0.0, 1.0], vec![vec![0.0, 0.0, 0.0, 0.0, 5.0]]).unwrap();
        let d = Distribution1D::from_density(quartic).unwrap();
        assert!(matches!(
            gamma_transform(&d),
            Err(DistributionError::Numerics(NumericsError::DegreeOverflow(5)))
        ));
    }
}
