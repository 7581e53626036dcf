use proptest::prelude::*;
use sirdro::distributions::{Distribution1D, ProductDistribution};
use sirdro::dro::{
    nu_lambda_1d, pragmatic_drsir_p1, pragmatic_drsir_rowgen, r_lambda_1d, standard_drsir_large_eps, worst_case_oracle,
    DroError, GridSpec, OracleVariant, Sense, WassersteinBall,
};
use sirdro::sir::CostVector;

fn usc(qp: f64, qm: f64, t: f64) -> f64 {
    let v = |t: f64| qp * t.ceil().max(0.0) + qm * (-t.floor()).max(0.0);
    if t.fract() != 0.0 {
        v(t)
    } else {
        v(t + 0.5).max(v(t - 0.5))
    }
}

fn brute_nu(qp: f64, qm: f64, lambda: f64, t: f64) -> f64 {
    // the sup over u is attained at t or at a lattice point within reach
    let mut best = usc(qp, qm, t);
    for k in (t.floor() as i64 - 20)..=(t.ceil() as i64 + 20) {
        let u = k as f64;
        best = best.max(usc(qp, qm, u) - lambda * (u - t).abs());
    }
    best
}

fn ball(atoms: &[(f64, f64)], p: f64, eps: f64) -> WassersteinBall {
    let r = ProductDistribution::new(vec![Distribution1D::discrete(atoms).unwrap()]).unwrap();
    WassersteinBall::new(r, p, eps).unwrap()
}

#[test]
fn large_radius_point_mass_example() {
    let q = CostVector::new(&[(2.0, 0.0)]).unwrap();
    let b = ball(&[(0.0, 1.0)], 1.0, 1.0);
    assert!((standard_drsir_large_eps(&q, &b, &[0.0]).unwrap() - 4.0).abs() < 1e-12);
    assert!((standard_drsir_large_eps(&q, &b, &[1.5]).unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn small_radius_is_rejected() {
    let q = CostVector::new(&[(2.0, 1.0)]).unwrap();
    let b = ball(&[(0.0, 1.0)], 1.0, 0.5);
    assert!(matches!(standard_drsir_large_eps(&q, &b, &[0.0]), Err(DroError::RadiusTooSmall { .. })));
}

#[test]
fn pragmatic_requires_order_one() {
    let q = CostVector::new(&[(2.0, 1.0)]).unwrap();
    assert!(matches!(pragmatic_drsir_p1(&q, &ball(&[(0.0, 1.0)], 2.0, 0.5), &[0.0]), Err(DroError::OrderNotOne(_))));
}

#[test]
fn order_two_rowgen_matches_oracle() {
    let q = CostVector::new(&[(2.0, 0.0)]).unwrap();
    let b = ball(&[(0.0, 1.0)], 2.0, 1.0);
    let cert = pragmatic_drsir_rowgen(&q, &b, &[0.0], 1e-7).unwrap();
    let oracle = worst_case_oracle(&q, &b, &[0.0], GridSpec::default(), Sense::Max, OracleVariant::Hat).unwrap();
    assert!(oracle.value <= cert.objective + 1e-7);
    assert!(cert.objective - oracle.value < 1e-2, "{} vs {}", cert.objective, oracle.value);
}

#[test]
fn oracle_distribution_stays_in_the_ball() {
    let q = CostVector::new(&[(2.0, 1.0)]).unwrap();
    let b = ball(&[(-0.4, 0.5), (0.7, 0.5)], 1.0, 0.3);
    let res = worst_case_oracle(&q, &b, &[0.1], GridSpec::default(), Sense::Max, OracleVariant::Usc).unwrap();
    let d = sirdro::distributions::wasserstein_1d(b.reference().marginal(0), &res.marginals[0], 1.0).unwrap();
    assert!(d <= 0.3 + 1e-9, "{d}");
}

proptest! {
    #[test]
    fn nu_matches_brute_force(qp in 0.0f64..4.0, qm in 0.0f64..4.0, extra in 0.0f64..3.0, t in -5.0f64..5.0) {
        let lambda = qp.max(qm) + extra;
        prop_assert!((nu_lambda_1d(qp, qm, lambda, t) - brute_nu(qp, qm, lambda, t)).abs() < 1e-9);
    }

    #[test]
    fn r_is_nu_minus_envelope(qp in 0.0f64..4.0, qm in 0.0f64..4.0, extra in 0.0f64..3.0, t in -5.0f64..5.0) {
        let lambda = qp.max(qm) + extra;
        let r = r_lambda_1d(qp, qm, lambda, t);
        prop_assert!(r >= -1e-12);
        prop_assert!((r - (brute_nu(qp, qm, lambda, t) - usc(qp, qm, t))).abs() < 1e-9);
    }

    #[test]
    fn weak_duality_oracle_below_rowgen(
        qp in 0.0f64..3.0, qm in 0.0f64..3.0, a in -2.0f64..2.0, b in -2.0f64..2.0, eps in 0.05f64..1.5, x in -1.0f64..1.0,
    ) {
        let q = CostVector::new(&[(qp, qm)]).unwrap();
        let bl = ball(&[(a.min(b), 0.5), (a.max(b) + 0.01, 0.5)], 1.0, eps);
        let cert = pragmatic_drsir_rowgen(&q, &bl, &[x], 1e-7).unwrap();
        let oracle = worst_case_oracle(&q, &bl, &[x], GridSpec { step: 1e-2, ..GridSpec::default() }, Sense::Max, OracleVariant::Hat).unwrap();
        prop_assert!(oracle.value <= cert.objective + 1e-6);
        prop_assert!((pragmatic_drsir_p1(&q, &bl, &[x]).unwrap() - cert.objective).abs() < 1e-6);
    }

    #[test]
    fn min_below_reference_below_max(qp in 0.0f64..3.0, qm in 0.0f64..3.0, a in -2.0f64..2.0, eps in 0.0f64..1.0, x in -1.0f64..1.0) {
        let q = CostVector::new(&[(qp, qm)]).unwrap();
        let bl = ball(&[(a, 1.0)], 1.0, eps);
        let g = GridSpec { step: 1e-2, ..GridSpec::default() };
        let hi = worst_case_oracle(&q, &bl, &[x], g, Sense::Max, OracleVariant::Usc).unwrap().value;
        let lo = worst_case_oracle(&q, &bl, &[x], g, Sense::Min, OracleVariant::Usc).unwrap().value;
        let mid = qp * (a - x).ceil().max(0.0) + qm * (-(a - x).floor()).max(0.0);
        prop_assert!(lo <= mid + 1e-12 && mid <= hi + 1e-12);
    }
}
