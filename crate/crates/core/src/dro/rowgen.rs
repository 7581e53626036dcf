//! Row generation for the smoothed worst case over a type-p Wasserstein ball
//! with discrete reference:
//!
//! inf_λ λε^p + Σᵢ Σ_k p_ik ν_ik,  ν_ik ≥ v̂ᵢ(s̄) − λ|ξ_ik − s̄|^p for all s̄.
//!
//! For fixed λ each ν_ik is found by adding the most violated cut until the
//! violation is below tolerance; λ is optimized by golden section.

use super::{check_dim, DroError, WassersteinBall};
use crate::numerics::minimize_convex_1d;
use crate::sir::value::{hat, hat_pieces};
use crate::sir::{effective_bracket, CostVector, FirstStageProblem, FirstStageSolution};

const INNER_TOL: f64 = 1e-7;
const LAMBDA_TOL: f64 = 1e-7;
const MAX_CUT_ROUNDS: usize = 100;
const MAX_WIDENINGS: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct RowGenIteration {
    pub lambda: f64,
    pub objective: f64,
    pub cuts: usize,
    pub max_violation: f64,
}

/// Dual solution `(λ, ν)`; `nu[i][k]` belongs to atom `k` of marginal `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate {
    pub lambda: f64,
    pub nu: Vec<Vec<f64>>,
    pub objective: f64,
    /// Largest violation of the cut model at the returned λ before the ν
    /// values were lifted to the separation optimum.
    pub max_violation: f64,
    /// Cuts added over the whole run.
    pub iterations: usize,
    pub log: Vec<RowGenIteration>,
}

/// sup over d of `slope·d − λ|d|^p`, with its maximizer. `None` when unbounded.
fn piece_sup(slope: f64, lambda: f64, p: f64) -> Option<(f64, f64)> {
    if slope == 0.0 {
        return Some((0.0, 0.0));
    }
    if p == 1.0 {
        return (slope.abs() <= lambda).then_some((0.0, 0.0));
    }
    if lambda <= 0.0 {
        return None;
    }
    let d = slope.signum() * (slope.abs() / (lambda * p)).powf(1.0 / (p - 1.0));
    Some((d, slope * d - lambda * d.abs().powf(p)))
}

/// Most violated cut location and value of sup_s̄ v̂(s̄ − x) − λ|ξ − s̄|^p.
fn separate(qp: f64, qm: f64, x: f64, xi: f64, lambda: f64, p: f64) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for (a, b) in hat_pieces(qp, qm) {
        let (d, gain) = piece_sup(b, lambda, p)?;
        let val = a + b * (xi - x) + gain;
        if best.map_or(true, |(_, v)| val > v) {
            best = Some((xi + d, val));
        }
    }
    best
}

struct Atom {
    loc: f64,
    mass: f64,
    cuts: Vec<f64>,
}

struct State<'a> {
    q: &'a CostVector,
    x: &'a [f64],
    p: f64,
    eps_p: f64,
    atoms: Vec<Vec<Atom>>,
    rounds: usize,
    log: Vec<RowGenIteration>,
}

impl State<'_> {
    fn cut_value(&self, i: usize, a: &Atom, lambda: f64) -> f64 {
        let (qp, qm) = self.q.pair(i);
        a.cuts
            .iter()
            .map(|&s| hat(qp, qm, s - self.x[i]) - lambda * (a.loc - s).abs().powf(self.p))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Dual objective at λ and the ν values; infinite when some separation is unbounded.
    fn evaluate(&mut self, lambda: f64) -> Result<(f64, Vec<Vec<f64>>, f64), DroError> {
        let mut total = lambda * self.eps_p;
        let mut nus = Vec::with_capacity(self.atoms.len());
        let mut worst = 0.0f64;
        for i in 0..self.atoms.len() {
            let (qp, qm) = self.q.pair(i);
            let mut row = Vec::with_capacity(self.atoms[i].len());
            for k in 0..self.atoms[i].len() {
                let loc = self.atoms[i][k].loc;
                let Some((s_star, v_star)) = separate(qp, qm, self.x[i], loc, lambda, self.p) else {
                    self.log.push(RowGenIteration {
                        lambda,
                        objective: f64::INFINITY,
                        cuts: self.cut_count(),
                        max_violation: f64::INFINITY,
                    });
                    return Ok((f64::INFINITY, Vec::new(), f64::INFINITY));
                };
                let mut nu = self.cut_value(i, &self.atoms[i][k], lambda);
                let mut rounds = 0;
                let mut viol = v_star - nu;
                while viol > INNER_TOL {
                    if rounds >= MAX_CUT_ROUNDS {
                        return Err(DroError::NonConvergence { iterations: rounds, gap: viol });
                    }
                    self.atoms[i][k].cuts.push(s_star);
                    self.rounds += 1;
                    rounds += 1;
                    nu = self.cut_value(i, &self.atoms[i][k], lambda);
                    viol = v_star - nu;
                }
                worst = worst.max(viol);
                // Lift to the exact supremum so the certificate is dual feasible.
                let nu = nu.max(v_star);
                total += self.atoms[i][k].mass * nu;
                row.push(nu);
            }
            nus.push(row);
        }
        self.log.push(RowGenIteration { lambda, objective: total, cuts: self.cut_count(), max_violation: worst });
        Ok((total, nus, worst))
    }

    fn cut_count(&self) -> usize {
        self.atoms.iter().flatten().map(|a| a.cuts.len()).sum()
    }
}

/// Smoothed worst-case expected recourse by row generation. `tol` bounds
/// the remaining cut violation at the returned λ.
pub fn pragmatic_drsir_rowgen(
    q: &CostVector,
    ball: &WassersteinBall,
    x: &[f64],
    tol: f64,
) -> Result<DualCertificate, DroError> {
    check_dim(q.dim(), ball.dim())?;
    check_dim(q.dim(), x.len())?;
    let reference = ball.reference();
    if !reference.is_discrete() {
        return Err(DroError::NotDiscrete);
    }
    let p = ball.p();
    let atoms: Vec<Vec<Atom>> = reference
        .marginals()
        .iter()
        .map(|d| d.atoms().iter().map(|&(loc, mass)| Atom { loc, mass, cuts: vec![loc] }).collect())
        .collect();
    let mut state = State { q, x, p, eps_p: ball.eps().powf(p), atoms, rounds: 0, log: Vec::new() };

    if ball.eps() == 0.0 {
        // Zero radius: the ball is the reference itself and λ → ∞.
        let nu: Vec<Vec<f64>> = (0..q.dim())
            .map(|i| state.atoms[i].iter().map(|a| hat(q.plus(i), q.minus(i), a.loc - x[i])).collect())
            .collect();
        let objective = (0..q.dim()).map(|i| state.atoms[i].iter().zip(&nu[i]).map(|(a, v)| a.mass * v).sum::<f64>()).sum();
        return Ok(DualCertificate { lambda: f64::INFINITY, nu, objective, max_violation: 0.0, iterations: 0, log: Vec::new() });
    }

    let qinf = q.qinf();
    let diam = reference.marginals().iter().map(|d| d.support().1 - d.support().0).fold(0.0, f64::max);
    let lambda_min = if p == 1.0 { qinf } else { 0.0 };
    let mut lambda_max = (qinf * (1.0 + diam.powf(p - 1.0))).max(qinf / ball.eps().powf(p - 1.0)).max(lambda_min + 1.0);

    let mut failure: Option<DroError> = None;
    let mut best_lambda = lambda_min;
    for _ in 0..MAX_WIDENINGS {
        let (lam, _) = minimize_convex_1d(
            |lam| match state.evaluate(lam) {
                Ok((v, _, _)) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::INFINITY
                }
            },
            lambda_min,
            lambda_max,
            LAMBDA_TOL,
        )?;
        if let Some(e) = failure.take() {
            return Err(e);
        }
        best_lambda = lam;
        if lam < 0.99 * lambda_max {
            break;
        }
        lambda_max *= 2.0;
    }

    let (objective, nu, max_violation) = state.evaluate(best_lambda)?;
    if !objective.is_finite() {
        return Err(DroError::NonConvergence { iterations: state.rounds, gap: f64::INFINITY });
    }
    if max_violation > tol.max(INNER_TOL) {
        return Err(DroError::NonConvergence { iterations: state.rounds, gap: max_violation });
    }
    Ok(DualCertificate { lambda: best_lambda, nu, objective, max_violation, iterations: state.rounds, log: state.log })
}

/// Largest distance the separation moves an atom at multiplier λ.
fn reach(qinf: f64, lambda: f64, p: f64) -> f64 {
    if p == 1.0 {
        0.0
    } else {
        (qinf / (lambda * p)).powf(1.0 / (p - 1.0))
    }
}

/// min cᵀx + smoothed worst case over the ball. For fixed λ the dual
/// objective separates over dimensions, so λ is found by golden section
/// around one golden-section search in x per dimension. Row generation at
/// the minimizer then supplies the certificate and iteration log.
pub fn solve_first_stage_rowgen(
    prob: &FirstStageProblem,
    q: &CostVector,
    ball: &WassersteinBall,
    tol: f64,
) -> Result<(FirstStageSolution, DualCertificate), DroError> {
    check_dim(q.dim(), ball.dim())?;
    check_dim(q.dim(), prob.dim())?;
    let reference = ball.reference();
    if !reference.is_discrete() {
        return Err(DroError::NotDiscrete);
    }
    let p = ball.p();
    let qinf = q.qinf();
    let eps_p = ball.eps().powf(p);

    // Per-dimension minimizer of c x + Σ_k p_k ν_k(x) at λ; `None` for λ = ∞.
    let inner = |i: usize, lambda: Option<f64>| -> Result<(f64, f64), DroError> {
        let (qp, qm) = q.pair(i);
        let c = prob.cost()[i];
        let d = reference.marginal(i);
        let margin = 2.0 + lambda.map_or(0.0, |l| reach(qinf, l, p));
        let (a, b) = effective_bracket(i, prob.bounds(i), d.support(), c - qp, c + qm, margin)?;
        let f = |x: f64| {
            let mut total = c * x;
            for &(loc, mass) in d.atoms() {
                total += mass
                    * match lambda {
                        None => hat(qp, qm, loc - x),
                        Some(l) => match separate(qp, qm, x, loc, l, p) {
                            Some((_, v)) => v,
                            None => return f64::INFINITY,
                        },
                    };
            }
            total
        };
        Ok(minimize_convex_1d(f, a, b, 1e-10)?)
    };
    let outer = |lambda: Option<f64>| -> Result<(f64, Vec<f64>), DroError> {
        let mut total = lambda.map_or(0.0, |l| l * eps_p);
        let mut xs = Vec::with_capacity(q.dim());
        for i in 0..q.dim() {
            let (x, v) = inner(i, lambda)?;
            total += v;
            xs.push(x);
        }
        Ok((total, xs))
    };

    let x = if ball.eps() == 0.0 {
        outer(None)?.1
    } else {
        let diam = reference.marginals().iter().map(|d| d.support().1 - d.support().0).fold(0.0, f64::max);
        let lambda_min = if p == 1.0 { qinf } else { 0.0 };
        let mut lambda_max =
            (qinf * (1.0 + diam.powf(p - 1.0))).max(qinf / ball.eps().powf(p - 1.0)).max(lambda_min + 1.0);
        let mut failure: Option<DroError> = None;
        let mut best = lambda_min;
        for _ in 0..MAX_WIDENINGS {
            let (lam, _) = minimize_convex_1d(
                |l| match outer(Some(l)) {
                    Ok((v, _)) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::INFINITY
                    }
                },
                lambda_min,
                lambda_max,
                LAMBDA_TOL,
            )?;
            if let Some(e) = failure.take() {
                return Err(e);
            }
            best = lam;
            if lam < 0.99 * lambda_max {
                break;
            }
            lambda_max *= 2.0;
        }
        outer(Some(best))?.1
    };
    let cert = pragmatic_drsir_rowgen(q, ball, &x, tol)?;
    let objective = prob.cost().iter().zip(&x).map(|(c, x)| c * x).sum::<f64>() + cert.objective;
    Ok((FirstStageSolution { x, objective }, cert))
}
