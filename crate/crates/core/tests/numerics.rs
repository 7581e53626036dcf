use proptest::prelude::*;
use sirdro::numerics::{lp_solve, minimize_convex_1d, Direction, LinearProgram, LpStatus, PiecewisePolynomial, RowSense};

#[test]
fn lp_small_production_problem() {
    // max 3a + 5b, a ≤ 4, 2b ≤ 12, 3a + 2b ≤ 18 → (2, 6), 36
    let mut lp = LinearProgram::new(Direction::Maximize, 2);
    lp.set_cost(0, 3.0);
    lp.set_cost(1, 5.0);
    lp.add_dense_row(&[1.0, 0.0], RowSense::Le, 4.0);
    lp.add_dense_row(&[0.0, 2.0], RowSense::Le, 12.0);
    lp.add_dense_row(&[3.0, 2.0], RowSense::Le, 18.0);
    let sol = lp_solve(&lp).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!((sol.objective - 36.0).abs() < 1e-9);
    assert!((sol.x[0] - 2.0).abs() < 1e-9 && (sol.x[1] - 6.0).abs() < 1e-9);
}

#[test]
fn lp_detects_infeasible_and_unbounded() {
    let mut lp = LinearProgram::new(Direction::Minimize, 1);
    lp.add_dense_row(&[1.0], RowSense::Ge, 2.0);
    lp.add_dense_row(&[1.0], RowSense::Le, 1.0);
    assert_eq!(lp_solve(&lp).unwrap().status, LpStatus::Infeasible);

    let mut lp = LinearProgram::new(Direction::Maximize, 1);
    lp.set_cost(0, 1.0);
    lp.add_dense_row(&[1.0], RowSense::Ge, 0.0);
    assert_eq!(lp_solve(&lp).unwrap().status, LpStatus::Unbounded);
}

#[test]
fn unit_average_of_identity_is_identity() {
    let f = PiecewisePolynomial::new(vec![-3.0, 3.0], vec![vec![0.0, 1.0]]).unwrap();
    let g = f.unit_average().unwrap();
    for s in [-2.4, -0.5, 0.0, 1.3, 2.5] {
        assert!((g.eval(s) - s).abs() < 1e-12);
    }
}

#[test]
fn golden_section_finds_boundary_minimum() {
    let (x, fx) = minimize_convex_1d(|t| 2.0 * t, 1.0, 5.0, 1e-9).unwrap();
    assert_eq!((x, fx), (1.0, 2.0));
}

fn piecewise() -> impl Strategy<Value = PiecewisePolynomial> {
    (1usize..5, -3.0f64..0.0)
        .prop_flat_map(|(n, start)| {
            (Just(start), prop::collection::vec(0.1f64..1.5, n), prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 1..4), n))
        })
        .prop_map(|(start, widths, coeffs)| {
            let mut breaks = vec![start];
            for w in widths {
                breaks.push(breaks.last().unwrap() + w);
            }
            PiecewisePolynomial::new(breaks, coeffs).unwrap()
        })
}

proptest! {
    #[test]
    fn integral_is_additive(f in piecewise(), cut in 0.0f64..1.0) {
        let (a, b) = f.support().unwrap();
        let m = a + cut * (b - a);
        let whole = f.integrate(a, b).unwrap();
        let parts = f.integrate(a, m).unwrap() + f.integrate(m, b).unwrap();
        prop_assert!((whole - parts).abs() < 1e-9);
    }

    #[test]
    fn unit_average_matches_quadrature(f in piecewise(), s in -4.0f64..4.0) {
        let g = f.unit_average().unwrap();
        let direct = f.integrate(s - 0.5, s + 0.5).unwrap();
        prop_assert!((g.eval(s) - direct).abs() < 1e-9);
    }

    #[test]
    fn antiderivative_differences_give_integrals(f in piecewise(), u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let (a, b) = f.support().unwrap();
        let (lo, hi) = (a + u.min(v) * (b - a), a + u.max(v) * (b - a));
        let big_f = f.antiderivative().unwrap();
        prop_assert!((big_f.eval(hi) - big_f.eval(lo) - f.integrate(lo, hi).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn golden_section_on_quadratic(c in -5.0f64..5.0) {
        let (x, _) = minimize_convex_1d(|t| (t - c).powi(2), -10.0, 10.0, 1e-9).unwrap();
        prop_assert!((x - c).abs() < 1e-6);
    }
}
