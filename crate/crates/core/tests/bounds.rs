use proptest::prelude::*;
use sirdro::bounds::{
    bound_big_g, bound_big_g_star, bound_g, bound_h_tv, drsir_sandwich, dyadic_family, error_bound_convex_approx, h_tv,
    total_variation, BoundReport, ConvexApprox,
};
use sirdro::distributions::{normal_spline, Distribution1D, ProductDistribution};
use sirdro::dro::WassersteinBall;
use sirdro::sir::CostVector;

#[test]
fn g_branches_meet_at_half() {
    assert!((bound_g(2.0, 0.5) - 2.0).abs() < 1e-12);
    assert!((bound_g(2.0, 0.08) - 0.8).abs() < 1e-12);
    assert!((bound_g(2.0, 3.0) - 7.0).abs() < 1e-12);
}

#[test]
fn big_g_reduces_to_g_in_one_dimension() {
    for eps in [0.01, 0.3, 0.5, 2.0] {
        assert!((bound_big_g(&[2.0], eps) - bound_g(2.0, eps)).abs() < 1e-12);
    }
    // G* = G − ‖q̄‖∞ε is the constant ‖q̄‖∞/2 past the threshold
    assert!((bound_big_g_star(&[2.0], 5.0) - 1.0).abs() < 1e-12);
}

#[test]
fn tv_bound_of_uniform_cell_is_quarter() {
    let d = Distribution1D::uniform(0.3, 1.3).unwrap();
    assert!((total_variation(&d) - 2.0).abs() < 1e-12);
    assert!((bound_h_tv(&[1.0], &[2.0]).unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(h_tv(f64::INFINITY), 1.0);
    assert!(bound_h_tv(&[1.0], &[1.0, 2.0]).is_err());
}

#[test]
fn normal_report() {
    let q = CostVector::new(&[(1.0, 0.0)]).unwrap();
    let p = ProductDistribution::new(vec![normal_spline(0.0, 1.0, 64, 8.0).unwrap()]).unwrap();
    let r = error_bound_convex_approx("normal", &q, &p, ConvexApprox::Alpha(0.0), false).unwrap();
    assert!((r.wasserstein_distance - 0.06769).abs() < 5e-5, "{}", r.wasserstein_distance);
    assert_eq!(BoundReport::CSV_HEADER.len(), r.csv_record().len());
}

#[test]
fn dyadic_family_trades_distance_for_variation() {
    let q = CostVector::new(&[(1.0, 0.0)]).unwrap();
    let mut last_w = f64::INFINITY;
    for n in 1..=6 {
        let d = dyadic_family(n).unwrap();
        assert!((total_variation(&d) - 2f64.powi(n as i32 + 1)).abs() < 1e-9);
        let p = ProductDistribution::new(vec![d]).unwrap();
        let r = error_bound_convex_approx("dyadic", &q, &p, ConvexApprox::Alpha(0.0), false).unwrap();
        assert!(r.wasserstein_distance < last_w);
        last_w = r.wasserstein_distance;
    }
    assert!(dyadic_family(0).is_err());
}

proptest! {
    #[test]
    fn g_is_concave_nondecreasing(qinf in 0.1f64..5.0, a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(bound_g(qinf, lo) <= bound_g(qinf, hi) + 1e-12);
        prop_assert!(bound_g(qinf, 0.5 * (lo + hi)) >= 0.5 * (bound_g(qinf, lo) + bound_g(qinf, hi)) - 1e-12);
    }

    #[test]
    fn sandwich_is_ordered(qp in 0.0f64..3.0, qm in 0.0f64..3.0, a in -2.0f64..2.0, eps in 0.0f64..2.0, x in -1.0f64..1.0) {
        let q = CostVector::new(&[(qp, qm)]).unwrap();
        let ball = WassersteinBall::new(ProductDistribution::new(vec![Distribution1D::point(a).unwrap()]).unwrap(), 1.0, eps).unwrap();
        let (lo, hi) = drsir_sandwich(&q, &ball, &[x]).unwrap();
        prop_assert!(lo <= hi);
    }
}
