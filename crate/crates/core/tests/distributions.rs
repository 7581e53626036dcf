use proptest::prelude::*;
use sirdro::distributions::{
    gamma_alpha_transform, gamma_transform, normal_spline, optimal_transport_cost, product_coupling, wasserstein_1d,
    Distribution1D, JointDiscrete,
};

fn discrete() -> impl Strategy<Value = Distribution1D> {
    prop::collection::vec((-5.0f64..5.0, 0.1f64..1.0), 1..8).prop_map(|raw| {
        let total: f64 = raw.iter().map(|a| a.1).sum();
        Distribution1D::discrete(&raw.iter().map(|&(l, w)| (l, w / total)).collect::<Vec<_>>()).unwrap()
    })
}

#[test]
fn smoothing_a_point_mass_gives_unit_uniform() {
    let d = gamma_transform(&Distribution1D::point(2.0).unwrap()).unwrap();
    assert!(d.atoms().is_empty());
    assert!((d.cdf(2.0) - 0.5).abs() < 1e-12);
    assert!((d.density().eval(1.7) - 1.0).abs() < 1e-12);
    assert_eq!(d.support(), (1.5, 2.5));
}

#[test]
fn smoothing_unit_uniform_gives_triangle() {
    let d = gamma_transform(&Distribution1D::uniform(0.0, 1.0).unwrap()).unwrap();
    assert_eq!(d.support(), (-0.5, 1.5));
    assert!((d.density().eval(0.5) - 1.0).abs() < 1e-12);
    assert!((d.density().eval(0.0) - 0.5).abs() < 1e-12);
}

#[test]
fn joint_example_distance() {
    let p = JointDiscrete::uniform(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let q = JointDiscrete::uniform(vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
    assert!((optimal_transport_cost(&p, &q, 1.0).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn normal_spline_is_a_probability_density() {
    let d = normal_spline(0.0, 1.0, 64, 8.0).unwrap();
    assert!((d.cdf(8.0) - 1.0).abs() < 1e-9);
    assert!((d.cdf(0.0) - 0.5).abs() < 1e-9);
    assert!(d.mean().abs() < 1e-9);
}

proptest! {
    #[test]
    fn smoothing_preserves_mean(d in discrete()) {
        let g = gamma_transform(&d).unwrap();
        prop_assert!((g.mean() - d.mean()).abs() < 1e-9);
    }

    #[test]
    fn alpha_cells_hold_their_mass(d in discrete(), alpha in 0.0f64..1.0) {
        // the α-approximation keeps the mass of every cell [α + k, α + k + 1)
        let g = gamma_alpha_transform(&d, alpha).unwrap();
        for k in -7..7 {
            let (lo, hi) = (alpha + k as f64, alpha + k as f64 + 1.0);
            let orig = d.cdf_left(hi) - d.cdf_left(lo);
            let approx = g.cdf(hi) - g.cdf(lo);
            prop_assert!((orig - approx).abs() < 1e-9);
        }
    }

    #[test]
    fn distance_to_smoothed_law_at_most_quarter(d in discrete()) {
        let g = gamma_transform(&d).unwrap();
        prop_assert!(wasserstein_1d(&d, &g, 1.0).unwrap() <= 0.25 + 1e-9);
    }

    #[test]
    fn w1_is_symmetric_and_matches_lp(a in discrete(), b in discrete()) {
        let ab = wasserstein_1d(&a, &b, 1.0).unwrap();
        let ba = wasserstein_1d(&b, &a, 1.0).unwrap();
        let as_joint = |d: &Distribution1D| JointDiscrete::new(d.atoms().iter().map(|&(l, w)| (vec![l], w)).collect()).unwrap();
        let lp = optimal_transport_cost(&as_joint(&a), &as_joint(&b), 1.0).unwrap();
        prop_assert!((ab - ba).abs() < 1e-9);
        prop_assert!((ab - lp).abs() < 1e-8);
    }

    #[test]
    fn w2_squared_matches_lp(a in discrete(), b in discrete()) {
        let as_joint = |d: &Distribution1D| JointDiscrete::new(d.atoms().iter().map(|&(l, w)| (vec![l], w)).collect()).unwrap();
        let lp = optimal_transport_cost(&as_joint(&a), &as_joint(&b), 2.0).unwrap();
        let w2 = wasserstein_1d(&a, &b, 2.0).unwrap();
        prop_assert!((w2 * w2 - lp).abs() < 1e-6, "{} vs {}", w2 * w2, lp);
    }

    #[test]
    fn product_coupling_has_target_marginals(a in discrete(), b in discrete(), c in discrete()) {
        let src = JointDiscrete::from_product(&[a.clone(), b]).unwrap();
        let out = product_coupling(&src, &[c.clone(), a.clone()]).unwrap();
        let m0 = out.projection(0).unwrap();
        let m1 = out.projection(1).unwrap();
        prop_assert!(wasserstein_1d(&m0, &c, 1.0).unwrap() < 1e-9);
        prop_assert!(wasserstein_1d(&m1, &a, 1.0).unwrap() < 1e-9);
    }
}
