//! Dual potentials ν^λ = v̄ + r^λ of the type-1 Wasserstein ball and the
//! closed forms built on them.

use super::{check_dim, DroError, WassersteinBall};
use crate::distributions::Distribution1D;
use crate::numerics::minimize_convex_1d;
use crate::sir::value::usc;
use crate::sir::{
    argmin_smallest, effective_bracket, expected_recourse, solve_first_stage, CostVector, FirstStageProblem,
    FirstStageSolution, FirstStageVariant, RecourseVariant,
};

/// Relative slack when comparing radii against the large-radius threshold.
const RADIUS_SLACK: f64 = 1e-12;

/// Intersections closer than this to an integer are moved onto it.
const SNAP: f64 = 1e-9;

/// sup over u of v̄(u) − λ|t − u| for one dimension, `t = s − x`.
/// Requires λ ≥ max(q⁺, q⁻) (not checked here).
pub fn nu_lambda_1d(qp: f64, qm: f64, lambda: f64, t: f64) -> f64 {
    let mut best = usc(qp, qm, t);
    // v̄ grows by at most max(q⁺, q⁻) ≤ λ per unit step, so lattice points
    // beyond the neighbouring cells never win.
    let k0 = t.floor() as i64 - 3;
    let k1 = t.ceil() as i64 + 3;
    for k in k0..=k1 {
        let u = k as f64;
        best = best.max(usc(qp, qm, u) - lambda * (t - u).abs());
    }
    best
}

/// r^λ = ν^λ − v̄ for one dimension, by the branch formulas away from the
/// lattice and by the sup definition on it.
pub fn r_lambda_1d(qp: f64, qm: f64, lambda: f64, t: f64) -> f64 {
    if t.fract() == 0.0 {
        return nu_lambda_1d(qp, qm, lambda, t) - usc(qp, qm, t);
    }
    let up = t.ceil() - t;
    let down = t - t.floor();
    // threshold x^λ − x
    let tl = -(qp - qm) / lambda;
    let val = if qp >= qm {
        if t <= tl {
            qm - lambda * down
        } else if t < 0.0 {
            qp - qm - lambda * up
        } else {
            qp - lambda * up
        }
    } else if t <= 0.0 {
        qm - lambda * down
    } else if t < tl {
        qm - qp - lambda * down
    } else {
        qp - lambda * up
    };
    val.max(0.0)
}

fn check_lambda(q: &CostVector, lambda: f64, dims: &[usize]) -> Result<(), DroError> {
    let needed = dims.iter().map(|&i| q.qbar()[i]).fold(0.0, f64::max);
    if !(lambda >= needed) {
        return Err(DroError::LambdaBelowThreshold { lambda, needed });
    }
    Ok(())
}

/// r^λ in dimension `dim` at scalar `s`, `x`.
pub fn r_lambda(q: &CostVector, lambda: f64, s: f64, x: f64, dim: usize) -> Result<f64, DroError> {
    if dim >= q.dim() {
        return Err(DroError::InvalidBall(format!("dimension index {dim} out of range")));
    }
    check_lambda(q, lambda, &[dim])?;
    let (qp, qm) = q.pair(dim);
    Ok(r_lambda_1d(qp, qm, lambda, s - x))
}

/// Σᵢ ν_i^λ(sᵢ, xᵢ); requires λ ≥ ‖q‖∞.
pub fn nu_lambda(q: &CostVector, lambda: f64, s: &[f64], x: &[f64]) -> Result<f64, DroError> {
    check_dim(q.dim(), s.len())?;
    check_dim(q.dim(), x.len())?;
    let all: Vec<usize> = (0..q.dim()).collect();
    check_lambda(q, lambda, &all)?;
    Ok((0..q.dim()).map(|i| nu_lambda_1d(q.plus(i), q.minus(i), lambda, s[i] - x[i])).sum())
}

/// Points (in `t`) between which ν^λ is affine, covering `[tlo, thi]`.
pub fn nu_kinks_1d(qp: f64, qm: f64, lambda: f64, tlo: f64, thi: f64) -> Vec<f64> {
    let k0 = tlo.floor() as i64;
    let k1 = thi.ceil() as i64;
    let mut out = Vec::new();
    for k in k0..=k1 {
        let (a, b) = (k as f64, (k + 1) as f64);
        out.push(a);
        if k == k1 || lambda <= 0.0 {
            continue;
        }
        // Inside (k, k+1): ν is the max of one falling line, one constant and one rising line.
        let flat = usc(qp, qm, a + 0.5);
        let fall = (k - 3..=k).map(|j| usc(qp, qm, j as f64) + lambda * j as f64).fold(f64::MIN, f64::max);
        let rise = (k + 1..=k + 4).map(|j| usc(qp, qm, j as f64) - lambda * j as f64).fold(f64::MIN, f64::max);
        for c in [(fall - flat) / lambda, (flat - rise) / lambda, (fall - rise) / (2.0 * lambda)] {
            let snapped = if (c - c.round()).abs() < SNAP { c.round() } else { c };
            if snapped > a && snapped < b {
                out.push(snapped);
            }
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup();
    out
}

fn expected_nu_1d(qp: f64, qm: f64, lambda: f64, d: &Distribution1D, x: f64) -> f64 {
    let (lo, hi) = d.support();
    let kinks: Vec<f64> = nu_kinks_1d(qp, qm, lambda, lo - x - 1.0, hi - x + 1.0).into_iter().map(|t| x + t).collect();
    d.expect_piecewise_affine(|s| nu_lambda_1d(qp, qm, lambda, s - x), &kinks)
}

fn check_large_radius(q: &CostVector, ball: &WassersteinBall) -> Result<f64, DroError> {
    if ball.p() != 1.0 {
        return Err(DroError::OrderNotOne(ball.p()));
    }
    check_dim(q.dim(), ball.dim())?;
    let qinf = q.qinf();
    if qinf == 0.0 {
        return Ok(0.0);
    }
    let needed = q.qbar().iter().sum::<f64>() / qinf;
    let got = ball.eps().powf(ball.p());
    if got < needed * (1.0 - RADIUS_SLACK) {
        return Err(DroError::RadiusTooSmall { needed, got });
    }
    Ok(qinf)
}

/// Worst-case expected recourse over a type-1 ball whose radius satisfies
/// ε ≥ Σᵢ‖qᵢ‖∞ / ‖q‖∞, where λ = ‖q‖∞ is dual optimal:
/// E[ν^{‖q‖∞}(ξ, x)] + ‖q‖∞ε.
pub fn standard_drsir_large_eps(q: &CostVector, ball: &WassersteinBall, x: &[f64]) -> Result<f64, DroError> {
    let lambda = check_large_radius(q, ball)?;
    check_dim(q.dim(), x.len())?;
    let p = ball.reference();
    let total: f64 = (0..q.dim()).map(|i| expected_nu_1d(q.plus(i), q.minus(i), lambda, p.marginal(i), x[i])).sum();
    Ok(total + lambda * ball.eps())
}

/// min cᵀx + standard_drsir_large_eps(x) over the box. Discrete references
/// are solved exactly by enumerating the kinks of the piecewise-linear
/// objective (smallest minimizer on ties); densities use a fine grid with
/// local golden-section refinement.
pub fn solve_first_stage_large_eps(
    prob: &FirstStageProblem,
    q: &CostVector,
    ball: &WassersteinBall,
) -> Result<FirstStageSolution, DroError> {
    let lambda = check_large_radius(q, ball)?;
    check_dim(q.dim(), prob.dim())?;
    let mut x = Vec::with_capacity(q.dim());
    let mut objective = lambda * ball.eps();
    for i in 0..q.dim() {
        let (qp, qm) = q.pair(i);
        let c = prob.cost()[i];
        let d = ball.reference().marginal(i);
        let f = |xi: f64| c * xi + expected_nu_1d(qp, qm, lambda, d, xi);
        let (a, b) = effective_bracket(i, prob.bounds(i), d.support(), c - qp, c + qm, 6.0)?;
        let (xi, fi) = if d.is_discrete() {
            let mut cand = vec![a, b];
            for &(s, _) in d.atoms() {
                for tau in nu_kinks_1d(qp, qm, lambda, s - b - 1.0, s - a + 1.0) {
                    let xc = s - tau;
                    if xc >= a && xc <= b {
                        cand.push(xc);
                    }
                }
            }
            argmin_smallest(&mut cand, f)
        } else {
            let n = 4000usize;
            let h = (b - a) / n as f64;
            let mut cand: Vec<f64> = (0..=n).map(|k| a + h * k as f64).collect();
            let (x0, _) = argmin_smallest(&mut cand, f);
            minimize_convex_1d(f, (x0 - h).max(a), (x0 + h).min(b), 1e-10)?
        };
        x.push(xi);
        objective += fi;
    }
    Ok(FirstStageSolution { x, objective })
}

/// E[v̂(ξ, x)] + ‖q‖∞ε: the smoothed worst case over a type-1 ball.
pub fn pragmatic_drsir_p1(q: &CostVector, ball: &WassersteinBall, x: &[f64]) -> Result<f64, DroError> {
    if ball.p() != 1.0 {
        return Err(DroError::OrderNotOne(ball.p()));
    }
    Ok(expected_recourse(q, ball.reference(), x, RecourseVariant::Hat)? + q.qinf() * ball.eps())
}

/// The radius term does not depend on x, so the smoothed first stage is
/// solved once and shifted.
pub fn solve_first_stage_pragmatic_w1(
    prob: &FirstStageProblem,
    q: &CostVector,
    ball: &WassersteinBall,
) -> Result<FirstStageSolution, DroError> {
    if ball.p() != 1.0 {
        return Err(DroError::OrderNotOne(ball.p()));
    }
    let mut sol = solve_first_stage(prob, q, ball.reference(), FirstStageVariant::Hat)?;
    sol.objective += q.qinf() * ball.eps();
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::ProductDistribution;

    fn brute(qp: f64, qm: f64, lambda: f64, t: f64) -> f64 {
        let span = 12.0;
        (0..=240_000)
            .map(|k| t - span + k as f64 * 1e-4)
            .chain([t.floor() - 1.0, t.floor(), t.ceil(), t.ceil() + 1.0, t])
            .map(|u| usc(qp, qm, u) - lambda * (t - u).abs())
            .fold(f64::MIN, f64::max)
    }

    fn ball_at(loc: f64, eps: f64) -> WassersteinBall {
        let p = ProductDistribution::new(vec![Distribution1D::point(loc).unwrap()]).unwrap();
        WassersteinBall::new(p, 1.0, eps).unwrap()
    }

    #[test]
    fn r_examples() {
        let q = CostVector::new(&[(2.0, 1.0)]).unwrap();
        assert!((r_lambda(&q, 3.0, 0.9, 0.0, 0).unwrap() - 1.7).abs() < 1e-12);
        assert!((r_lambda(&q, 3.0, 0.5, 0.0, 0).unwrap() - 0.5).abs() < 1e-12);
        assert!((r_lambda(&q, 3.0, -0.9, 0.0, 0).unwrap() - 0.7).abs() < 1e-12);
        assert!(matches!(r_lambda(&q, 1.5, 0.2, 0.0, 0), Err(DroError::LambdaBelowThreshold { .. })));
    }

    #[test]
    fn nu_examples() {
        let q = CostVector::new(&[(2.0, 1.0)]).unwrap();
        assert_eq!(nu_lambda(&q, 3.0, &[0.0], &[0.0]).unwrap(), 2.0);
        assert!((nu_lambda(&q, 3.0, &[0.9], &[0.0]).unwrap() - 3.7).abs() < 1e-12);
        let q2 = CostVector::new(&[(2.0, 0.0)]).unwrap();
        assert_eq!(nu_lambda(&q2, 2.0, &[-5.0], &[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn branches_match_sup_off_lattice() {
        for &(qp, qm, lambda) in &[(2.0, 1.0, 3.0), (1.0, 3.0, 3.0), (2.0, 2.0, 2.5), (0.5, 1.5, 4.0), (2.0, 0.0, 2.0)] {
            for k in 0..60 {
                let t = -3.0 + 0.1037 * k as f64;
                let lhs = usc(qp, qm, t) + r_lambda_1d(qp, qm, lambda, t);
                assert!((lhs - nu_lambda_1d(qp, qm, lambda, t)).abs() < 1e-12, "{qp} {qm} {lambda} {t}");
                assert!((nu_lambda_1d(qp, qm, lambda, t) - brute(qp, qm, lambda, t)).abs() < 5e-4);
            }
        }
    }

    #[test]
    fn kinks_make_nu_affine_between() {
        let (qp, qm, lambda) = (2.0, 1.0, 2.3);
        let ks = nu_kinks_1d(qp, qm, lambda, -3.0, 3.0);
        for w in ks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let m = 0.5 * (a + b);
            let lin = 0.5 * (nu_lambda_1d(qp, qm, lambda, a) + nu_lambda_1d(qp, qm, lambda, b));
            assert!((nu_lambda_1d(qp, qm, lambda, m) - lin).abs() < 1e-12, "[{a}, {b}]");
        }
    }

    #[test]
    fn large_eps_examples() {
        let q = CostVector::new(&[(2.0, 0.0)]).unwrap();
        assert_eq!(standard_drsir_large_eps(&q, &ball_at(0.0, 1.0), &[0.0]).unwrap(), 4.0);
        assert_eq!(standard_drsir_large_eps(&q, &ball_at(0.0, 1.0), &[1.5]).unwrap(), 2.0);
        let q21 = CostVector::new(&[(2.0, 1.0)]).unwrap();
        assert!(matches!(
            standard_drsir_large_eps(&q21, &ball_at(0.0, 0.25), &[0.0]),
            Err(DroError::RadiusTooSmall { .. })
        ));
    }

    #[test]
    fn pragmatic_examples() {
        let a = 0.3;
        let q = CostVector::new(&[(2.0, 0.0)]).unwrap();
        assert!((pragmatic_drsir_p1(&q, &ball_at(a, 0.3), &[a]).unwrap() - 1.6).abs() < 1e-12);
        let q2 = CostVector::new(&[(2.0, 0.0), (3.0, 0.0)]).unwrap();
        let p = ProductDistribution::new(vec![Distribution1D::point(0.0).unwrap(), Distribution1D::point(0.0).unwrap()])
            .unwrap();
        let ball = WassersteinBall::new(p, 1.0, 1.0).unwrap();
        assert!((pragmatic_drsir_p1(&q2, &ball, &[0.0, 0.0]).unwrap() - 5.5).abs() < 1e-12);
    }

    #[test]
    fn newsvendor_point_mass() {
        let a = 0.8;
        let q = CostVector::new(&[(2.0, 0.0)]).unwrap();
        let prob = FirstStageProblem::unconstrained(vec![1.0]).unwrap();
        let sol = solve_first_stage_large_eps(&prob, &q, &ball_at(a, 1.0)).unwrap();
        assert_eq!(sol.x[0], a + 1.0);
    }
}
