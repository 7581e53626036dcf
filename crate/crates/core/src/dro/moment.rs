//! Smoothed worst case over marginal moment sets with bounded support.
//!
//! Moment conditions E[g(ξᵢ)] = M on the smoothed law become E[ĝ(ξᵢ)] = M on
//! the reference, with ĝ(s) = ∫_{s−1/2}^{s+1/2} g. The dual
//!
//! min Σ_k M_k ν_k + π  s.t.  Σ_k ĝ_k(s)ν_k + π ≥ v̂(s − x) on [L, U]
//!
//! is solved per dimension by cutting planes with exact separation.

use super::{check_dim, DroError};
use crate::numerics::{lp_solve, poly, Direction, LinearProgram, LpStatus, PiecewisePolynomial, RowSense};
use crate::sir::value::{hat, hat_pieces};
use crate::sir::{CostVector, FirstStageProblem, SirError};

const MAX_ROUNDS: usize = 500;
const INITIAL_GRID: usize = 41;
/// Step of the grid primal used to tell infeasible moments from a loose master.
const FEASIBILITY_STEP: f64 = 1e-3;

/// Moment function g, stored together with its unit average ĝ.
#[derive(Debug, Clone, PartialEq)]
pub enum MomentFunction {
    /// g(s) = s^d.
    Power(u32),
    /// g(s) = |s − center|.
    AbsDev(f64),
    /// Piecewise polynomial of degree ≤ 3, zero outside its breakpoints.
    Custom { g: PiecewisePolynomial, averaged: PiecewisePolynomial },
}

impl MomentFunction {
    pub fn power(degree: u32) -> Result<Self, DroError> {
        if degree > 4 {
            return Err(DroError::InvalidBall(format!("power moment of degree {degree} exceeds 4")));
        }
        Ok(MomentFunction::Power(degree))
    }

    pub fn abs_dev(center: f64) -> Result<Self, DroError> {
        if !center.is_finite() {
            return Err(DroError::InvalidBall(format!("non-finite center {center}")));
        }
        Ok(MomentFunction::AbsDev(center))
    }

    pub fn custom(g: PiecewisePolynomial) -> Result<Self, DroError> {
        if g.degree() > 3 {
            return Err(DroError::InvalidBall(format!("custom moment of degree {} exceeds 3", g.degree())));
        }
        let averaged = g.unit_average()?;
        Ok(MomentFunction::Custom { g, averaged })
    }

    pub fn g(&self, s: f64) -> f64 {
        match self {
            MomentFunction::Power(d) => s.powi(*d as i32),
            MomentFunction::AbsDev(c) => (s - c).abs(),
            MomentFunction::Custom { g, .. } => g.eval(s),
        }
    }

    pub fn g_hat(&self, s: f64) -> f64 {
        match self {
            MomentFunction::Power(_) => poly::eval(&self.hat_poly_at(s), s),
            MomentFunction::AbsDev(c) => {
                let u = s - c;
                if u.abs() <= 0.5 {
                    u * u + 0.25
                } else {
                    u.abs()
                }
            }
            MomentFunction::Custom { averaged, .. } => averaged.eval(s),
        }
    }

    /// Points where ĝ switches polynomial.
    fn hat_breaks(&self) -> Vec<f64> {
        match self {
            MomentFunction::Power(_) => Vec::new(),
            MomentFunction::AbsDev(c) => vec![c - 0.5, c + 0.5],
            MomentFunction::Custom { averaged, .. } => averaged.breakpoints().to_vec(),
        }
    }

    /// Coefficients of the polynomial ĝ equals on the piece containing `s`.
    fn hat_poly_at(&self, s: f64) -> Vec<f64> {
        match self {
            // ((s + 1/2)^{d+1} − (s − 1/2)^{d+1}) / (d + 1), expanded
            MomentFunction::Power(d) => match d {
                0 => vec![1.0],
                1 => vec![0.0, 1.0],
                2 => vec![1.0 / 12.0, 0.0, 1.0],
                3 => vec![0.0, 0.25, 0.0, 1.0],
                _ => vec![1.0 / 80.0, 0.0, 0.5, 0.0, 1.0],
            },
            MomentFunction::AbsDev(c) => {
                let u = s - c;
                if u.abs() <= 0.5 {
                    vec![c * c + 0.25, -2.0 * c, 1.0]
                } else if u > 0.0 {
                    vec![-c, 1.0]
                } else {
                    vec![*c, -1.0]
                }
            }
            MomentFunction::Custom { averaged, .. } => averaged
                .segments()
                .find(|(a, b, _)| s >= *a && s < *b)
                .map(|(_, _, c)| c.to_vec())
                .unwrap_or_else(|| vec![0.0]),
        }
    }
}

/// ĝ as a piecewise polynomial on `[lo, hi]`.
pub fn g_hat_piecewise(f: &MomentFunction, lo: f64, hi: f64) -> Result<PiecewisePolynomial, DroError> {
    if !(lo < hi) {
        return Err(DroError::InvalidBall(format!("empty interval [{lo}, {hi}]")));
    }
    let mut breaks = vec![lo];
    breaks.extend(f.hat_breaks().into_iter().filter(|&b| b > lo && b < hi));
    breaks.push(hi);
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    let coeffs = breaks.windows(2).map(|w| f.hat_poly_at(0.5 * (w[0] + w[1]))).collect();
    Ok(PiecewisePolynomial::new(breaks, coeffs)?)
}

/// One condition E[g(ξᵢ)] = target.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSpec {
    pub function: MomentFunction,
    pub target: f64,
}

impl MomentSpec {
    pub fn new(function: MomentFunction, target: f64) -> Result<Self, DroError> {
        if !target.is_finite() {
            return Err(DroError::InvalidBall(format!("non-finite moment target {target}")));
        }
        Ok(Self { function, target })
    }

    /// A point the condition is centred on, used to seed cuts.
    fn center(&self) -> Option<f64> {
        match &self.function {
            MomentFunction::Power(1) => Some(self.target),
            MomentFunction::AbsDev(c) => Some(*c),
            _ => None,
        }
    }
}

/// Support bounds and moment conditions of one marginal.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentDim {
    pub lower: f64,
    pub upper: f64,
    pub specs: Vec<MomentSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentAmbiguitySet {
    dims: Vec<MomentDim>,
}

impl MomentAmbiguitySet {
    pub fn new(dims: Vec<MomentDim>) -> Result<Self, DroError> {
        if dims.is_empty() {
            return Err(DroError::InvalidBall("moment set without dimensions".into()));
        }
        for (i, d) in dims.iter().enumerate() {
            if !(d.lower.is_finite() && d.upper.is_finite() && d.lower <= d.upper) {
                return Err(DroError::InvalidBall(format!("dimension {i}: invalid support [{}, {}]", d.lower, d.upper)));
            }
        }
        Ok(Self { dims })
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[MomentDim] {
        &self.dims
    }
}

/// Dual solution for one marginal.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentDual {
    /// One multiplier per moment condition.
    pub nu: Vec<f64>,
    /// Normalization multiplier, already raised by `max_violation` so the
    /// dual point is feasible and `value` is an upper bound.
    pub pi: f64,
    pub value: f64,
    pub max_violation: f64,
    pub cuts: usize,
    /// `(objective, violation)` per cutting-plane round.
    pub history: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentResult {
    pub value: f64,
    pub duals: Vec<MomentDual>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentFirstStage {
    pub x: Vec<f64>,
    pub objective: f64,
    pub duals: Vec<MomentDual>,
}

/// Piece index of v̂ active at shortfall `t`.
fn hat_piece(t: f64) -> usize {
    if t < -0.5 {
        0
    } else if t < 0.5 {
        1
    } else {
        2
    }
}

/// Local maximizers of v̂(s − x) − Σ ĝ_k(s)ν_k − π on [L, U], best first.
fn separate(qp: f64, qm: f64, x: f64, dim: &MomentDim, nu: &[f64], pi: f64) -> Vec<(f64, f64)> {
    let (lo, hi) = (dim.lower, dim.upper);
    let slack = |s: f64| {
        hat(qp, qm, s - x) - dim.specs.iter().zip(nu).map(|(sp, v)| v * sp.function.g_hat(s)).sum::<f64>() - pi
    };
    if lo == hi {
        return vec![(lo, slack(lo))];
    }
    let mut breaks = vec![lo, hi, x - 0.5, x + 0.5];
    for sp in &dim.specs {
        breaks.extend(sp.function.hat_breaks());
    }
    breaks.retain(|&b| b >= lo && b <= hi);
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    let pieces = hat_pieces(qp, qm);
    let mut cand = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let (alpha, beta) = pieces[hat_piece(mid - x)];
        let mut h = vec![alpha - beta * x - pi, beta];
        for (sp, v) in dim.specs.iter().zip(nu) {
            h = poly::sub(&h, &poly::scale(&sp.function.hat_poly_at(mid), *v));
        }
        cand.push(a);
        cand.push(b);
        cand.extend(poly::roots_in(&poly::derivative(&h), a, b));
    }
    let mut out: Vec<(f64, f64)> = cand.into_iter().map(|s| (s, slack(s))).collect();
    out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    out
}

fn initial_points(dim: &MomentDim, x: f64) -> Vec<f64> {
    let (lo, hi) = (dim.lower, dim.upper);
    let mut pts = vec![lo, hi, x - 0.5, x + 0.5];
    for sp in &dim.specs {
        if let Some(c) = sp.center() {
            pts.extend([c - 0.5, c, c + 0.5]);
        }
    }
    pts.extend((0..INITIAL_GRID).map(|k| lo + (hi - lo) * k as f64 / (INITIAL_GRID - 1) as f64));
    pts.retain(|&s| s >= lo && s <= hi);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}

/// Master LP variables: optional x first, then ν_k, then π.
struct Master {
    lp: LinearProgram,
    with_x: bool,
    k: usize,
}

impl Master {
    fn new(dim: &MomentDim, x_cost: Option<(f64, f64, f64)>) -> Self {
        let mut lp = LinearProgram::new(Direction::Minimize, 0);
        let with_x = x_cost.is_some();
        if let Some((c, a, b)) = x_cost {
            lp.add_var(c, a, b);
        }
        for sp in &dim.specs {
            lp.add_var(sp.target, f64::NEG_INFINITY, f64::INFINITY);
        }
        lp.add_var(1.0, f64::NEG_INFINITY, f64::INFINITY);
        Self { lp, with_x, k: dim.specs.len() }
    }

    fn offset(&self) -> usize {
        usize::from(self.with_x)
    }

    /// Cut(s) at support point s: one row for fixed x, three rows (one per
    /// affine piece of v̂) when x is a variable.
    fn add_cut(&mut self, dim: &MomentDim, qp: f64, qm: f64, x: f64, s: f64) {
        let o = self.offset();
        let mut base: Vec<(usize, f64)> = dim.specs.iter().enumerate().map(|(k, sp)| (o + k, sp.function.g_hat(s))).collect();
        base.push((o + self.k, 1.0));
        if self.with_x {
            for (alpha, beta) in hat_pieces(qp, qm) {
                let mut row = base.clone();
                row.push((0, beta));
                self.lp.add_row(row, RowSense::Ge, alpha + beta * s);
            }
        } else {
            self.lp.add_row(base, RowSense::Ge, hat(qp, qm, s - x));
        }
    }
}

/// Cutting planes for one marginal; `x_box` makes x a master variable.
fn solve_dim(
    i: usize,
    qp: f64,
    qm: f64,
    dim: &MomentDim,
    x_fixed: f64,
    x_box: Option<(f64, f64, f64)>,
    tol: f64,
) -> Result<(f64, MomentDual), DroError> {
    let mut master = Master::new(dim, x_box);
    let seed_x = x_box.map_or(x_fixed, |(_, a, b)| 0.5 * (a + b));
    let mut pts = initial_points(dim, seed_x);
    if let Some((_, a, b)) = x_box {
        pts.extend([a - 0.5, a + 0.5, b - 0.5, b + 0.5].into_iter().filter(|&s| s >= dim.lower && s <= dim.upper));
    }
    for &s in &pts {
        master.add_cut(dim, qp, qm, x_fixed, s);
    }
    let mut history = Vec::new();
    for _ in 0..MAX_ROUNDS {
        let sol = lp_solve(&master.lp)?;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Unbounded => {
                let feasible = grid_primal_dim(qp, qm, dim, seed_x, FEASIBILITY_STEP).is_ok();
                return Err(if feasible { DroError::MasterUnbounded(i) } else { DroError::InfeasibleMoments(i) });
            }
            LpStatus::Infeasible => return Err(DroError::Lp(format!("moment master infeasible in dimension {i}"))),
        }
        let o = master.offset();
        let x = if master.with_x { sol.x[0] } else { x_fixed };
        let nu = sol.x[o..o + master.k].to_vec();
        let pi = sol.x[o + master.k];
        let found = separate(qp, qm, x, dim, &nu, pi);
        let viol = found.first().map_or(0.0, |c| c.1).max(0.0);
        history.push((sol.objective, viol));
        if viol <= tol {
            let dual = MomentDual {
                nu,
                pi: pi + viol,
                value: sol.objective - if master.with_x { x_box.unwrap().0 * x } else { 0.0 } + viol,
                max_violation: viol,
                cuts: master.lp.num_rows(),
                history,
            };
            return Ok((x, dual));
        }
        let mut added = 0;
        for &(s, v) in &found {
            if v <= tol || added >= 4 {
                break;
            }
            master.add_cut(dim, qp, qm, x, s);
            added += 1;
        }
    }
    let gap = history.last().map_or(f64::INFINITY, |h| h.1);
    Err(DroError::NonConvergence { iterations: MAX_ROUNDS, gap })
}

fn check_set(q: &CostVector, set: &MomentAmbiguitySet) -> Result<(), DroError> {
    check_dim(q.dim(), set.dim())
}

/// sup of E[v̂(ξ, x)] over the moment set (upper bound within `tol`).
pub fn pragmatic_moment_drsir(
    q: &CostVector,
    set: &MomentAmbiguitySet,
    x: &[f64],
    tol: f64,
) -> Result<MomentResult, DroError> {
    check_set(q, set)?;
    check_dim(q.dim(), x.len())?;
    let mut duals = Vec::with_capacity(q.dim());
    let mut value = 0.0;
    for (i, dim) in set.dims.iter().enumerate() {
        let (qp, qm) = q.pair(i);
        let (_, dual) = solve_dim(i, qp, qm, dim, x[i], None, tol)?;
        value += dual.value;
        duals.push(dual);
    }
    Ok(MomentResult { value, duals })
}

/// Joint cutting planes over (x, ν, π) per dimension.
pub fn solve_first_stage_moment(
    prob: &FirstStageProblem,
    q: &CostVector,
    set: &MomentAmbiguitySet,
    tol: f64,
) -> Result<MomentFirstStage, DroError> {
    check_set(q, set)?;
    check_dim(q.dim(), prob.dim())?;
    let mut xs = Vec::with_capacity(q.dim());
    let mut duals = Vec::with_capacity(q.dim());
    let mut objective = 0.0;
    for (i, dim) in set.dims.iter().enumerate() {
        let (qp, qm) = q.pair(i);
        let c = prob.cost()[i];
        let (lo, hi) = prob.bounds(i);
        // Outside [L − 1/2, U + 1/2] the objective is affine in x with slope
        // c − q⁺ (left) or c + q⁻ (right).
        if lo == f64::NEG_INFINITY && c - qp > 1e-12 {
            return Err(SirError::Unbounded(i).into());
        }
        if hi == f64::INFINITY && c + qm < -1e-12 {
            return Err(SirError::Unbounded(i).into());
        }
        let a = if lo.is_finite() { lo } else { (dim.lower - 1.0).min(hi) };
        let b = if hi.is_finite() { hi } else { (dim.upper + 1.0).max(a) };
        let (x, dual) = solve_dim(i, qp, qm, dim, 0.0, Some((c, a, b)), tol)?;
        objective += c * x + dual.value;
        xs.push(x);
        duals.push(dual);
    }
    Ok(MomentFirstStage { x: xs, objective, duals })
}

fn grid_primal_dim(qp: f64, qm: f64, dim: &MomentDim, x: f64, step: f64) -> Result<f64, DroError> {
    let (lo, hi) = (dim.lower, dim.upper);
    let mut pts = vec![lo, hi, x - 0.5, x + 0.5];
    if hi > lo {
        let n = ((hi - lo) / step).ceil() as usize;
        pts.extend((0..=n).map(|k| (lo + step * k as f64).min(hi)));
    }
    pts.retain(|&s| s >= lo && s <= hi);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let mut lp = LinearProgram::new(Direction::Maximize, 0);
    for &s in &pts {
        lp.add_var(hat(qp, qm, s - x), 0.0, f64::INFINITY);
    }
    lp.add_row((0..pts.len()).map(|j| (j, 1.0)).collect(), RowSense::Eq, 1.0);
    for sp in &dim.specs {
        lp.add_row(pts.iter().enumerate().map(|(j, &s)| (j, sp.function.g_hat(s))).collect(), RowSense::Eq, sp.target);
    }
    let sol = lp_solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.objective),
        _ => Err(DroError::Lp(format!("{:?}", sol.status))),
    }
}

/// Grid-discretized primal: max Σ w_j v̂(s_j, x) over weights on a grid of
/// step `step` matching every transformed moment. A lower bound on the
/// dual value.
pub fn grid_primal_moment(q: &CostVector, set: &MomentAmbiguitySet, x: &[f64], step: f64) -> Result<f64, DroError> {
    check_set(q, set)?;
    check_dim(q.dim(), x.len())?;
    if !(step > 0.0) {
        return Err(DroError::InvalidBall(format!("grid step {step} must be positive")));
    }
    let mut total = 0.0;
    for (i, dim) in set.dims.iter().enumerate() {
        let (qp, qm) = q.pair(i);
        total += grid_primal_dim(qp, qm, dim, x[i], step).map_err(|e| match e {
            DroError::Lp(_) => DroError::InfeasibleMoments(i),
            other => other,
        })?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_mad(mu: f64, mad: f64, lo: f64, hi: f64) -> MomentAmbiguitySet {
        MomentAmbiguitySet::new(vec![MomentDim {
            lower: lo,
            upper: hi,
            specs: vec![
                MomentSpec::new(MomentFunction::power(1).unwrap(), mu).unwrap(),
                MomentSpec::new(MomentFunction::abs_dev(mu).unwrap(), mad).unwrap(),
            ],
        }])
        .unwrap()
    }

    #[test]
    fn g_hat_examples() {
        let mean = MomentFunction::power(1).unwrap();
        assert_eq!(mean.g_hat(1.7), 1.7);
        let mad = MomentFunction::abs_dev(0.4).unwrap();
        assert_eq!(mad.g_hat(0.4), 0.25);
        assert_eq!(mad.g_hat(2.4), 2.0);
    }

    #[test]
    fn pieces_agree_with_closed_form() {
        for f in [MomentFunction::power(2).unwrap(), MomentFunction::abs_dev(0.3).unwrap()] {
            let pp = g_hat_piecewise(&f, -2.0, 2.0).unwrap();
            for k in 0..40 {
                let s = -2.0 + 0.1 * k as f64 + 0.013;
                assert!((pp.eval(s) - f.g_hat(s)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mean_mad_against_grid() {
        let q = CostVector::new(&[(2.0, 0.0)]).unwrap();
        let set = mean_mad(0.0, 0.5, -3.0, 3.0);
        let dual = pragmatic_moment_drsir(&q, &set, &[0.0], 1e-8).unwrap();
        let primal = grid_primal_moment(&q, &set, &[0.0], 1e-3).unwrap();
        assert!(primal <= dual.value + 1e-8);
        assert!(dual.value - primal < 1e-3, "{} {}", dual.value, primal);
    }

    #[test]
    fn point_support() {
        let q = CostVector::new(&[(2.0, 0.0)]).unwrap();
        let set = MomentAmbiguitySet::new(vec![MomentDim {
            lower: 1.0,
            upper: 1.0,
            specs: vec![MomentSpec::new(MomentFunction::power(1).unwrap(), 1.0).unwrap()],
        }])
        .unwrap();
        let r = pragmatic_moment_drsir(&q, &set, &[0.7], 1e-9).unwrap();
        assert!((r.value - hat(2.0, 0.0, 0.3)).abs() < 1e-9);
        let prob = FirstStageProblem::unconstrained(vec![1.0]).unwrap();
        let fs = solve_first_stage_moment(&prob, &q, &set, 1e-9).unwrap();
        assert!((fs.x[0] - 1.5).abs() < 1e-9, "{:?}", fs.x);
    }

    #[test]
    fn infeasible_mean() {
        let q = CostVector::new(&[(1.0, 1.0)]).unwrap();
        let set = MomentAmbiguitySet::new(vec![MomentDim {
            lower: 0.0,
            upper: 1.0,
            specs: vec![MomentSpec::new(MomentFunction::power(1).unwrap(), 5.0).unwrap()],
        }])
        .unwrap();
        assert!(matches!(pragmatic_moment_drsir(&q, &set, &[0.0], 1e-8), Err(DroError::InfeasibleMoments(0))));
    }
}
