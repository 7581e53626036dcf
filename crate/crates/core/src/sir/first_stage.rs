use super::{expected_recourse_1d, CostVector, RecourseVariant, SirError};
use crate::distributions::ProductDistribution;
use crate::numerics::minimize_convex_1d;

/// min cᵀx + Q(x) over a box (bounds may be infinite).
#[derive(Debug, Clone, PartialEq)]
pub struct FirstStageProblem {
    c: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl FirstStageProblem {
    pub fn new(c: Vec<f64>, bounds: Vec<(f64, f64)>) -> Result<Self, SirError> {
        if c.len() != bounds.len() {
            return Err(SirError::DimensionMismatch { expected: c.len(), got: bounds.len() });
        }
        if let Some(&bad) = c.iter().find(|v| !v.is_finite()) {
            return Err(SirError::NonFinite(bad));
        }
        for &(lo, hi) in &bounds {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(SirError::InvalidBox(lo, hi));
            }
        }
        Ok(Self { c, lower: bounds.iter().map(|b| b.0).collect(), upper: bounds.iter().map(|b| b.1).collect() })
    }

    /// Unbounded box.
    pub fn unconstrained(c: Vec<f64>) -> Result<Self, SirError> {
        let n = c.len();
        Self::new(c, vec![(f64::NEG_INFINITY, f64::INFINITY); n])
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn cost(&self) -> &[f64] {
        &self.c
    }

    pub fn bounds(&self, i: usize) -> (f64, f64) {
        (self.lower[i], self.upper[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FirstStageVariant {
    /// Convex smoothed recourse; golden-section per dimension.
    Hat,
    /// Exact recourse; grid search (default step 1e-3 of the box width)
    /// plus every jump location induced by atoms.
    ExactGrid { step: Option<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirstStageSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

/// Finite search interval for one dimension of a recourse objective whose
/// slope in x is `slope_left` far to the left of the data and `slope_right`
/// far to the right. Errors when the objective decreases without bound.
pub(crate) fn effective_bracket(
    dim: usize,
    (lo, hi): (f64, f64),
    (smin, smax): (f64, f64),
    slope_left: f64,
    slope_right: f64,
    margin: f64,
) -> Result<(f64, f64), SirError> {
    if lo == f64::NEG_INFINITY && slope_left > 1e-12 {
        return Err(SirError::Unbounded(dim));
    }
    if hi == f64::INFINITY && slope_right < -1e-12 {
        return Err(SirError::Unbounded(dim));
    }
    let mut a = if lo.is_finite() { lo } else { smin - margin };
    let mut b = if hi.is_finite() { hi } else { smax + margin };
    if a > b {
        if lo.is_finite() {
            b = a;
        } else {
            a = b;
        }
    }
    Ok((a, b))
}

/// Evaluates candidates in increasing order and keeps the first strict minimum.
pub(crate) fn argmin_smallest(candidates: &mut Vec<f64>, f: impl Fn(f64) -> f64) -> (f64, f64) {
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    candidates.dedup();
    let mut best = (candidates[0], f(candidates[0]));
    for &x in candidates.iter().skip(1) {
        let v = f(x);
        if v < best.1 - 1e-12 * (1.0 + best.1.abs()) {
            best = (x, v);
        }
    }
    best
}

pub fn solve_first_stage(
    prob: &FirstStageProblem,
    q: &CostVector,
    p: &ProductDistribution,
    variant: FirstStageVariant,
) -> Result<FirstStageSolution, SirError> {
    let m = q.dim();
    if prob.dim() != m || p.dim() != m {
        return Err(SirError::DimensionMismatch { expected: m, got: prob.dim().min(p.dim()) });
    }
    let mut x = Vec::with_capacity(m);
    let mut objective = 0.0;
    for i in 0..m {
        let (qp, qm) = q.pair(i);
        let c = prob.c[i];
        let d = p.marginal(i);
        let f = |xi: f64| c * xi + expected_recourse_1d(qp, qm, d, xi, recourse_of(variant));
        let (xi, fi) = match variant {
            FirstStageVariant::Hat => {
                let (a, b) = effective_bracket(i, prob.bounds(i), d.support(), c - qp, c + qm, 2.0)?;
                minimize_convex_1d(f, a, b, 1e-9)?
            }
            FirstStageVariant::ExactGrid { step } => {
                let (lo, hi) = prob.bounds(i);
                if !lo.is_finite() || !hi.is_finite() {
                    return Err(SirError::NeedsFiniteBox(i));
                }
                let mut cand = vec![lo, hi];
                if hi > lo {
                    let h = step.unwrap_or(1e-3 * (hi - lo));
                    if !(h > 0.0) {
                        return Err(SirError::NonFinite(h));
                    }
                    let n = ((hi - lo) / h).floor() as usize;
                    cand.extend((0..=n).map(|k| lo + k as f64 * h).filter(|&v| v <= hi));
                }
                for &(s, _) in d.atoms() {
                    let j0 = (s - hi).ceil() as i64;
                    let j1 = (s - lo).floor() as i64;
                    cand.extend((j0..=j1).map(|j| s - j as f64).filter(|&v| v >= lo && v <= hi));
                }
                argmin_smallest(&mut cand, f)
            }
        };
        x.push(xi);
        objective += fi;
    }
    Ok(FirstStageSolution { x, objective })
}

fn recourse_of(variant: FirstStageVariant) -> RecourseVariant {
    match variant {
        FirstStageVariant::Hat => RecourseVariant::Hat,
        FirstStageVariant::ExactGrid { .. } => RecourseVariant::Exact,
    }
}
