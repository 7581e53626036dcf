//! Grid transportation LP for the best or worst expected recourse over a
//! Wasserstein ball with discrete reference.
//!
//! Every source atom of every marginal ships its mass to candidate
//! destinations; the transport costs of all dimensions share one budget
//! row Σ cost·π ≤ ε^p. The returned law is the product of the optimized
//! marginals, which has the same separable transport cost.
//!
//! With p = 1 the supremum is generally not attained: a sliver of mass sent
//! far along the steeper recourse slope earns that slope per unit of
//! budget. The max-sense LP carries one such ray column per dimension and
//! realizes it in the returned law by moving a tiny mass a large distance.

use super::{check_dim, DroError, WassersteinBall};
use crate::distributions::{Distribution1D, JointDiscrete};
use crate::numerics::{lp_solve, Direction, LinearProgram, LpStatus, RowSense};
use crate::sir::value::{exact, hat, usc};
use crate::sir::CostVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Destination grid step.
    pub step: f64,
    /// Grid reaches this far beyond the atom hull; `None` means ε + 2.
    pub margin: Option<f64>,
    /// When set, the LP is re-solved at half the step and a change in value
    /// above 10× this tolerance is reported as [`DroError::GridTooCoarse`].
    pub refine_tol: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { step: 1e-3, margin: None, refine_tol: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleVariant {
    /// The true recourse: its usc envelope for `Max`, the recourse itself for `Min`.
    Usc,
    /// The smoothed recourse v̂.
    Hat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    pub distribution: JointDiscrete,
    pub marginals: Vec<Distribution1D>,
}

/// Masses below this are dropped from the returned marginals.
const MASS_FLOOR: f64 = 1e-14;

/// How far a realized ray carries its sliver of mass.
const RAY_DISTANCE: f64 = 1e8;

struct Column {
    dest: usize,
    cost: f64,
}

fn recourse(variant: OracleVariant, sense: Sense, qp: f64, qm: f64, t: f64) -> f64 {
    match (variant, sense) {
        (OracleVariant::Hat, _) => hat(qp, qm, t),
        (OracleVariant::Usc, Sense::Max) => usc(qp, qm, t),
        (OracleVariant::Usc, Sense::Min) => exact(qp, qm, t),
    }
}

fn destinations(atoms: &[(f64, f64)], x: f64, step: f64, margin: f64) -> Vec<f64> {
    let lo = atoms.first().unwrap().0 - margin;
    let hi = atoms.last().unwrap().0 + margin;
    let mut d: Vec<f64> = atoms.iter().map(|a| a.0).collect();
    let n = ((hi - lo) / step).ceil() as usize;
    d.extend((0..=n).map(|k| lo + step * k as f64));
    let k0 = (lo - x).floor() as i64;
    let k1 = (hi - x).ceil() as i64;
    for k in k0..=k1 {
        let base = x + k as f64;
        d.extend([base - step, base, base + step]);
    }
    d.retain(|v| *v >= lo - step && *v <= hi + step);
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    d.dedup();
    d
}

/// Destinations that are not dominated by a cheaper one for this source.
/// `better(a, b)` is true when value `a` strictly improves on `b`.
fn pareto(src: f64, dests: &[f64], vals: &[f64], p: f64, better: impl Fn(f64, f64) -> bool) -> Vec<(usize, f64)> {
    let start = dests.partition_point(|&d| d < src);
    // Walk outward on each side; cost grows with distance.
    let mut right: Vec<(usize, f64)> = Vec::new();
    let mut best: Option<f64> = None;
    for j in start..dests.len() {
        if best.map_or(true, |b| better(vals[j], b)) {
            best = Some(vals[j]);
            right.push((j, (dests[j] - src).abs().powf(p)));
        }
    }
    let mut left: Vec<(usize, f64)> = Vec::new();
    best = None;
    for j in (0..start).rev() {
        if best.map_or(true, |b| better(vals[j], b)) {
            best = Some(vals[j]);
            left.push((j, (src - dests[j]).abs().powf(p)));
        }
    }
    let mut all: Vec<(usize, f64)> = right.into_iter().chain(left).collect();
    all.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let mut out = Vec::with_capacity(all.len());
    let mut best: Option<f64> = None;
    for (j, c) in all {
        if best.map_or(true, |b| better(vals[j], b)) {
            best = Some(vals[j]);
            out.push((j, c));
        }
    }
    out
}

fn solve_once(
    q: &CostVector,
    ball: &WassersteinBall,
    x: &[f64],
    step: f64,
    margin: f64,
    sense: Sense,
    variant: OracleVariant,
) -> Result<OracleResult, DroError> {
    let m = q.dim();
    let p = ball.p();
    let better = |a: f64, b: f64| match sense {
        Sense::Max => a > b,
        Sense::Min => a < b,
    };
    let dir = match sense {
        Sense::Max => Direction::Maximize,
        Sense::Min => Direction::Minimize,
    };
    let mut lp = LinearProgram::new(dir, 0);
    let mut cols: Vec<Column> = Vec::new();
    let mut dests_all = Vec::with_capacity(m);
    let mut sources: Vec<Vec<(f64, f64, Vec<usize>)>> = Vec::with_capacity(m);
    for i in 0..m {
        let (qp, qm) = q.pair(i);
        let atoms = ball.reference().marginal(i).atoms();
        let dests = destinations(atoms, x[i], step, margin);
        let vals: Vec<f64> = dests.iter().map(|&d| recourse(variant, sense, qp, qm, d - x[i])).collect();
        let mut per_dim = Vec::with_capacity(atoms.len());
        for &(loc, mass) in atoms {
            let mut idx = Vec::new();
            for (j, cost) in pareto(loc, &dests, &vals, p, better) {
                idx.push(lp.add_var(vals[j], 0.0, f64::INFINITY));
                cols.push(Column { dest: j, cost });
            }
            per_dim.push((loc, mass, idx));
        }
        sources.push(per_dim);
        dests_all.push(dests);
    }
    let row_sense = match sense {
        Sense::Max => RowSense::Le,
        Sense::Min => RowSense::Eq,
    };
    for per_dim in &sources {
        for (_, mass, idx) in per_dim {
            lp.add_row(idx.iter().map(|&v| (v, 1.0)).collect(), row_sense, *mass);
        }
    }
    let mut budget: Vec<(usize, f64)> =
        cols.iter().enumerate().filter(|(_, c)| c.cost > 0.0).map(|(v, c)| (v, c.cost)).collect();
    // For p = 1 the supremum also counts vanishing mass sent arbitrarily far, which
    // earns the outer slope per unit of budget without using any mass.
    let mut rays = vec![None; m];
    if sense == Sense::Max && p == 1.0 {
        for (i, ray) in rays.iter_mut().enumerate() {
            let (qp, qm) = q.pair(i);
            let slope = qp.max(qm);
            if slope > 0.0 {
                let v = lp.add_var(slope, 0.0, f64::INFINITY);
                budget.push((v, 1.0));
                *ray = Some((v, if qp >= qm { 1.0 } else { -1.0 }));
            }
        }
    }
    if !budget.is_empty() {
        lp.add_row(budget, RowSense::Le, ball.eps().powf(p));
    }
    let sol = lp_solve(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(DroError::Lp(format!("{:?}", sol.status)));
    }

    let mut marginals = Vec::with_capacity(m);
    let mut value = 0.0;
    for i in 0..m {
        let (qp, qm) = q.pair(i);
        let eval = |d: f64| recourse(variant, sense, qp, qm, d - x[i]);
        let mut mass = vec![0.0; dests_all[i].len()];
        for (loc, w, idx) in &sources[i] {
            let mut shipped = 0.0;
            for &v in idx {
                let amount = sol.x[v].max(0.0);
                mass[cols[v].dest] += amount;
                shipped += amount;
            }
            // Unshipped mass stays at the source atom.
            let left = w - shipped;
            if left > 0.0 {
                let home = dests_all[i].partition_point(|&d| d < *loc);
                mass[home] += left;
            }
        }
        let total: f64 = mass.iter().sum();
        let mut atoms: Vec<(f64, f64)> = dests_all[i]
            .iter()
            .zip(&mass)
            .filter(|(_, &w)| w > MASS_FLOOR)
            .map(|(&d, &w)| (d, w / total))
            .collect();
        if let Some((v, dir)) = rays[i] {
            let budget = sol.x[v];
            if budget > 0.0 {
                // Realize the ray: move a sliver of the heaviest atom RAY_DISTANCE further out.
                let k = (0..atoms.len()).max_by(|&a, &b| atoms[a].1.partial_cmp(&atoms[b].1).unwrap()).unwrap();
                let sliver = (budget / RAY_DISTANCE).min(atoms[k].1);
                atoms[k].1 -= sliver;
                atoms.push((atoms[k].0 + dir * RAY_DISTANCE, sliver));
                atoms.retain(|a| a.1 > 0.0);
                atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            }
        }
        value += atoms.iter().map(|&(d, w)| w * eval(d)).sum::<f64>();
        marginals.push(Distribution1D::discrete(&atoms)?);
    }
    let distribution = JointDiscrete::from_product(&marginals)?;
    Ok(OracleResult { value, distribution, marginals })
}

/// Best (`Min`) or worst (`Max`) expected recourse over the ball,
/// restricted to grid destinations. For `Max` the value is a lower bound on
/// the true supremum that converges as the step shrinks.
pub fn worst_case_oracle(
    q: &CostVector,
    ball: &WassersteinBall,
    x: &[f64],
    grid: GridSpec,
    sense: Sense,
    variant: OracleVariant,
) -> Result<OracleResult, DroError> {
    check_dim(q.dim(), ball.dim())?;
    check_dim(q.dim(), x.len())?;
    if !ball.reference().is_discrete() {
        return Err(DroError::NotDiscrete);
    }
    if !(grid.step > 0.0) || !grid.step.is_finite() {
        return Err(DroError::InvalidBall(format!("grid step {} must be positive", grid.step)));
    }
    let margin = grid.margin.unwrap_or(ball.eps() + 2.0);
    let coarse = solve_once(q, ball, x, grid.step, margin, sense, variant)?;
    if let Some(tol) = grid.refine_tol {
        let fine = solve_once(q, ball, x, 0.5 * grid.step, margin, sense, variant)?;
        if (fine.value - coarse.value).abs() > 10.0 * tol {
            return Err(DroError::GridTooCoarse { coarse: coarse.value, refined: fine.value });
        }
    }
    Ok(coarse)
}
