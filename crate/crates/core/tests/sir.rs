use proptest::prelude::*;
use sirdro::distributions::{gamma_transform, Distribution1D, ProductDistribution};
use sirdro::sir::{
    expected_recourse, expected_recourse_1d, solve_first_stage, value, value_hat, value_usc, CostVector, FirstStageProblem,
    FirstStageVariant, RecourseVariant,
};

fn v(qp: f64, qm: f64, t: f64) -> f64 {
    qp * t.ceil().max(0.0) + qm * (-t.floor()).max(0.0)
}

#[test]
fn recourse_values_at_examples() {
    let q = CostVector::new(&[(2.0, 1.0), (1.0, 3.0)]).unwrap();
    // ⌈0.3⌉ = 1 shortage, ⌊−1.5⌋ = −2 surplus
    assert_eq!(value(&q, &[0.3, -1.5], &[0.0, 0.0]).unwrap(), 2.0 + 6.0);
    assert_eq!(value_usc(&q, &[1.0, 0.0], &[0.0, 0.0]).unwrap(), 4.0 + 3.0);
    assert_eq!(value_hat(&q, &[0.0, 0.0], &[0.0, 0.0]).unwrap(), 1.5 + 2.0);
}

#[test]
fn dimension_mismatch_is_an_error() {
    let q = CostVector::new(&[(1.0, 1.0)]).unwrap();
    assert!(value(&q, &[0.0, 1.0], &[0.0]).is_err());
    assert!(CostVector::new(&[(-1.0, 0.0)]).is_err());
}

#[test]
fn smoothed_first_stage_solves_quantile_problem() {
    // min c x + E[v̂] with ξ ~ δ₀, q⁺ = 2, c = 1: slope c − q⁺ left of −1/2, c right of it.
    let q = CostVector::new(&[(2.0, 0.0)]).unwrap();
    let p = ProductDistribution::new(vec![Distribution1D::point(0.0).unwrap()]).unwrap();
    let prob = FirstStageProblem::new(vec![1.0], vec![(-5.0, 5.0)]).unwrap();
    let sol = solve_first_stage(&prob, &q, &p, FirstStageVariant::Hat).unwrap();
    assert!((sol.x[0] - 0.5).abs() < 1e-6, "{:?}", sol);
}

fn discrete() -> impl Strategy<Value = Distribution1D> {
    prop::collection::vec((-4.0f64..4.0, 0.1f64..1.0), 1..8).prop_map(|raw| {
        let total: f64 = raw.iter().map(|a| a.1).sum();
        Distribution1D::discrete(&raw.iter().map(|&(l, w)| (l, w / total)).collect::<Vec<_>>()).unwrap()
    })
}

proptest! {
    #[test]
    fn discrete_expectation_is_a_weighted_sum(d in discrete(), qp in 0.0f64..5.0, qm in 0.0f64..5.0, x in -3.0f64..3.0) {
        let direct: f64 = d.atoms().iter().map(|&(s, w)| w * v(qp, qm, s - x)).sum();
        prop_assert!((expected_recourse_1d(qp, qm, &d, x, RecourseVariant::Exact) - direct).abs() < 1e-9);
    }

    #[test]
    fn smoothed_law_makes_recourse_convex(d in discrete(), qp in 0.0f64..5.0, qm in 0.0f64..5.0, x in -3.0f64..3.0, h in 0.01f64..1.0) {
        let g = gamma_transform(&d).unwrap();
        let q = CostVector::new(&[(qp, qm)]).unwrap();
        let p = ProductDistribution::new(vec![g]).unwrap();
        let f = |t: f64| expected_recourse(&q, &p, &[t], RecourseVariant::Exact).unwrap();
        prop_assert!(f(x) <= 0.5 * (f(x - h) + f(x + h)) + 1e-9);
    }

    #[test]
    fn recourse_envelopes_are_ordered(qp in 0.0f64..5.0, qm in 0.0f64..5.0, t in -4.0f64..4.0) {
        let q = CostVector::new(&[(qp, qm)]).unwrap();
        let exact = value(&q, &[t], &[0.0]).unwrap();
        let upper = value_usc(&q, &[t], &[0.0]).unwrap();
        prop_assert!(exact <= upper);
        // v̂ lies within max(q⁺, q⁻) of v
        prop_assert!((value_hat(&q, &[t], &[0.0]).unwrap() - exact).abs() <= qp.max(qm) + 1e-12);
    }
}
