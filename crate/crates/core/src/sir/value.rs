//! One-dimensional recourse functions of the shortfall `t = ξ − x`.

/// q⁺⌈t⌉⁺ + q⁻⌊t⌋⁻.
pub fn exact(qp: f64, qm: f64, t: f64) -> f64 {
    qp * t.ceil().max(0.0) + qm * (-t.floor()).max(0.0)
}

/// Upper semicontinuous envelope of [`exact`]: the max of the value and both
/// one-sided limits. Right-continuous for t > 0, left-continuous for t < 0.
pub fn usc(qp: f64, qm: f64, t: f64) -> f64 {
    let up = qp * (t.floor() + 1.0).max(0.0);
    let down = qm * (1.0 - t.ceil()).max(0.0);
    up.max(down)
}

/// Smoothed value q⁺(t + 1/2)⁺ + q⁻(t − 1/2)⁻.
pub fn hat(qp: f64, qm: f64, t: f64) -> f64 {
    qp * (t + 0.5).max(0.0) + qm * (0.5 - t).max(0.0)
}

/// Continuous relaxation q⁺t⁺ + q⁻t⁻.
pub fn lp(qp: f64, qm: f64, t: f64) -> f64 {
    qp * t.max(0.0) + qm * (-t).max(0.0)
}

/// Cost of the integer restriction, `exact − lp ≥ 0`.
pub fn psi(qp: f64, qm: f64, t: f64) -> f64 {
    exact(qp, qm, t) - lp(qp, qm, t)
}

/// The three affine functions of `t` whose maximum is [`hat`]:
/// `(intercept, slope)` pairs.
pub fn hat_pieces(qp: f64, qm: f64) -> [(f64, f64); 3] {
    [
        (0.5 * qm, -qm),
        (0.5 * qp + 0.5 * qm, qp - qm),
        (0.5 * qp, qp),
    ]
}
