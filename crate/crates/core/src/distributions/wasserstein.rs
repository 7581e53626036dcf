//! Wasserstein distances and couplings.

use gauss_quad::GaussLegendre;

use super::{Distribution1D, DistributionError, JointDiscrete};
use crate::numerics::piecewise::dedup_breaks;
use crate::numerics::{lp_solve, poly, Direction, LinearProgram, LpStatus, RowSense};

/// Total Gauss–Legendre nodes spread over the unit interval for p > 1.
const QUANTILE_NODES: usize = 2048;
const NODES_PER_PANEL: usize = 8;

fn check_order(p: f64) -> Result<(), DistributionError> {
    if p.is_nan() || p < 1.0 || p.is_infinite() {
        return Err(DistributionError::InvalidOrder(p));
    }
    Ok(())
}

/// Type-p Wasserstein distance between two laws on the real line.
///
/// p = 1 integrates |F₁ − F₂| exactly (sign changes located by root
/// finding); p > 1 integrates |F₁⁻¹ − F₂⁻¹|^p over u by composite
/// Gauss–Legendre on pieces where both quantile functions are continuous.
pub fn wasserstein_1d(d1: &Distribution1D, d2: &Distribution1D, p: f64) -> Result<f64, DistributionError> {
    check_order(p)?;
    if p == 1.0 {
        return w1_cdf(d1, d2);
    }
    let mut cuts = vec![0.0, 1.0];
    for d in [d1, d2] {
        let mut pts: Vec<f64> = d.atoms().iter().map(|a| a.0).collect();
        pts.extend(d.density().breakpoints().iter().copied());
        for s in pts {
            cuts.push(d.cdf(s));
            cuts.push(d.cdf_left(s));
        }
    }
    cuts.retain(|u| (0.0..=1.0).contains(u));
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cuts = dedup_breaks(cuts);
    let rule = GaussLegendre::new(NODES_PER_PANEL).expect("valid Gauss-Legendre order");
    let panels_total = QUANTILE_NODES / NODES_PER_PANEL;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a <= 1e-15 {
            continue;
        }
        let panels = ((panels_total as f64 * (b - a)).ceil() as usize).max(1);
        let h = (b - a) / panels as f64;
        for k in 0..panels {
            let (pa, pb) = (a + k as f64 * h, a + (k + 1) as f64 * h);
            total += rule.integrate(pa, pb, |u| (d1.quantile(u) - d2.quantile(u)).abs().powf(p));
        }
    }
    Ok(total.max(0.0).powf(1.0 / p))
}

fn w1_cdf(d1: &Distribution1D, d2: &Distribution1D) -> Result<f64, DistributionError> {
    let diff = d1.cdf_piecewise()?.sub(&d2.cdf_piecewise()?);
    let mut total = 0.0;
    for (lo, hi, c) in diff.segments() {
        if poly::is_zero(c) {
            continue;
        }
        if lo.is_infinite() || hi.is_infinite() {
            if poly::degree(c) == 0 && c[0].abs() < 1e-13 {
                continue;
            }
            return Err(DistributionError::NonIntegrable);
        }
        let anti = poly::antiderivative(c);
        let mut pts = vec![lo];
        pts.extend(poly::roots_in(c, lo, hi).into_iter().filter(|&r| r > lo && r < hi));
        pts.push(hi);
        for w in pts.windows(2) {
            total += (poly::eval(&anti, w[1]) - poly::eval(&anti, w[0])).abs();
        }
    }
    Ok(total)
}

fn ground_cost(a: &[f64], b: &[f64], p: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs().powf(p)).sum()
}

/// Optimal transportation cost min_π ∫‖s − t‖_p^p dπ between two discrete laws.
pub fn optimal_transport_cost(d1: &JointDiscrete, d2: &JointDiscrete, p: f64) -> Result<f64, DistributionError> {
    check_order(p)?;
    if d1.dim() != d2.dim() {
        return Err(DistributionError::DimensionMismatch { expected: d1.dim(), got: d2.dim() });
    }
    let (n1, n2) = (d1.len(), d2.len());
    let mut lp = LinearProgram::new(Direction::Minimize, n1 * n2);
    for i in 0..n1 {
        for j in 0..n2 {
            lp.set_cost(i * n2 + j, ground_cost(&d1.points()[i], &d2.points()[j], p));
        }
    }
    for i in 0..n1 {
        lp.add_row((0..n2).map(|j| (i * n2 + j, 1.0)).collect(), RowSense::Eq, d1.masses()[i]);
    }
    for j in 0..n2 {
        lp.add_row((0..n1).map(|i| (i * n2 + j, 1.0)).collect(), RowSense::Eq, d2.masses()[j]);
    }
    let sol = lp_solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.objective.max(0.0)),
        other => Err(DistributionError::Transport(format!("{other:?}"))),
    }
}

/// Type-p Wasserstein distance with ‖·‖_p^p ground cost, via the transportation LP.
pub fn wasserstein_joint_discrete(d1: &JointDiscrete, d2: &JointDiscrete, p: f64) -> Result<f64, DistributionError> {
    Ok(optimal_transport_cost(d1, d2, p)?.powf(1.0 / p))
}

/// Monotone (quantile) coupling of two discrete laws as `(from, to, mass)` triples.
pub fn monotone_plan(a: &Distribution1D, b: &Distribution1D) -> Result<Vec<(f64, f64, f64)>, DistributionError> {
    if !a.is_discrete() || !b.is_discrete() {
        return Err(DistributionError::NotDiscrete);
    }
    let (xa, xb) = (a.atoms(), b.atoms());
    let mut plan = Vec::with_capacity(xa.len() + xb.len());
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (xa[0].1, xb[0].1);
    loop {
        let w = ra.min(rb);
        if w > 0.0 {
            plan.push((xa[i].0, xb[j].0, w));
        }
        ra -= w;
        rb -= w;
        let last_a = i + 1 == xa.len();
        let last_b = j + 1 == xb.len();
        if last_a && last_b {
            break;
        }
        // advance whichever side is exhausted; the last atom absorbs rounding
        if (ra <= 1e-15 && !last_a) || last_b {
            if last_a {
                break;
            }
            i += 1;
            ra = xa[i].1;
        } else {
            j += 1;
            rb = xb[j].1;
        }
    }
    Ok(plan)
}

/// Moves each coordinate of `source` independently along the monotone plan
/// from its marginal to `targets[i]`. The result has marginals `targets` and
/// transport cost equal to the sum of the marginal costs.
pub fn product_coupling(source: &JointDiscrete, targets: &[Distribution1D]) -> Result<JointDiscrete, DistributionError> {
    let m = source.dim();
    if targets.len() != m {
        return Err(DistributionError::DimensionMismatch { expected: m, got: targets.len() });
    }
    // conditional destination lists per coordinate, keyed by source location
    let mut conditional: Vec<Vec<(f64, Vec<(f64, f64)>)>> = Vec::with_capacity(m);
    for (i, target) in targets.iter().enumerate() {
        let marginal = source.projection(i)?;
        let plan = monotone_plan(&marginal, target)?;
        let mut table: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
        for &(loc, mass) in marginal.atoms() {
            let dest = plan.iter().filter(|e| e.0 == loc).map(|e| (e.1, e.2 / mass)).collect();
            table.push((loc, dest));
        }
        conditional.push(table);
    }
    let mut atoms: Vec<(Vec<f64>, f64)> = Vec::new();
    for (point, &w) in source.points().iter().zip(source.masses()) {
        let mut partial: Vec<(Vec<f64>, f64)> = vec![(Vec::with_capacity(m), w)];
        for (i, &s) in point.iter().enumerate() {
            let dest = &conditional[i].iter().find(|e| e.0 == s).expect("source atom present").1;
            let mut next = Vec::with_capacity(partial.len() * dest.len());
            for (p, pw) in &partial {
                for &(t, cw) in dest {
                    let mut q = p.clone();
                    q.push(t);
                    next.push((q, pw * cw));
                }
            }
            partial = next;
        }
        atoms.extend(partial);
    }
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    for a in &mut atoms {
        a.1 /= total;
    }
    JointDiscrete::new(atoms)
}
