use super::NumericsError;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the minimizer of a convex `f` on `[lo, hi]`.
///
/// Returns `(x*, f(x*))`. The bracket ends are compared as well, so a
/// minimizer at the boundary is returned exactly.
pub fn minimize_convex_1d(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64), NumericsError> {
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(NumericsError::InvalidInterval(lo, hi));
    }
    if !lo.is_finite() || !hi.is_finite() {
        return Err(NumericsError::InvalidInterval(lo, hi));
    }
    if !(tol > 0.0) {
        return Err(NumericsError::InvalidModel(format!("tolerance must be positive, got {tol}")));
    }
    if lo == hi {
        return Ok((lo, f(lo)));
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = (mid, f(mid));
    for x in [lo, hi] {
        let fx = f(x);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    Ok(best)
}
