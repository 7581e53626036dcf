use super::poly;
use super::NumericsError;

/// Highest polynomial degree a [`PiecewisePolynomial`] may carry.
pub const MAX_DEGREE: usize = 4;

/// Breakpoints closer than this are merged.
pub const BREAK_TOL: f64 = 1e-12;

/// Piecewise polynomial on consecutive half-open segments `[b_i, b_{i+1})`.
///
/// Coefficients are in the global variable `t`. Outside the outer breakpoints
/// the function is zero. The outer breakpoints may be infinite.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PiecewisePolynomial {
    breaks: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
}

impl PiecewisePolynomial {
    pub fn new(breaks: Vec<f64>, coeffs: Vec<Vec<f64>>) -> Result<Self, NumericsError> {
        if breaks.is_empty() && coeffs.is_empty() {
            return Ok(Self::zero());
        }
        if breaks.len() != coeffs.len() + 1 {
            return Err(NumericsError::InvalidPiecewise(format!(
                "{} breakpoints for {} segments",
                breaks.len(),
                coeffs.len()
            )));
        }
        for (i, b) in breaks.iter().enumerate() {
            if b.is_nan() {
                return Err(NumericsError::InvalidPiecewise("NaN breakpoint".into()));
            }
            let inner = i > 0 && i + 1 < breaks.len();
            if inner && b.is_infinite() {
                return Err(NumericsError::InvalidPiecewise(
                    "infinite breakpoint in the interior".into(),
                ));
            }
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(NumericsError::InvalidPiecewise(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if breaks.first() == Some(&f64::INFINITY) || breaks.last() == Some(&f64::NEG_INFINITY) {
            return Err(NumericsError::InvalidPiecewise("empty segment".into()));
        }
        let mut cleaned = Vec::with_capacity(coeffs.len());
        for c in coeffs {
            if c.iter().any(|a| !a.is_finite()) {
                return Err(NumericsError::InvalidPiecewise("non-finite coefficient".into()));
            }
            let c = poly::trim(c);
            if poly::degree(&c) > MAX_DEGREE {
                return Err(NumericsError::DegreeOverflow(poly::degree(&c)));
            }
            cleaned.push(c);
        }
        Ok(Self { breaks, coeffs: cleaned })
    }

    /// The zero function (no segments).
    pub fn zero() -> Self {
        Self { breaks: Vec::new(), coeffs: Vec::new() }
    }

    /// `value` on `[a, b)`, zero elsewhere.
    pub fn constant(a: f64, b: f64, value: f64) -> Result<Self, NumericsError> {
        Self::new(vec![a, b], vec![vec![value]])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    pub fn segment_count(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Iterates `(lo, hi, coefficients)` per segment.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, &[f64])> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (self.breaks[i], self.breaks[i + 1], c.as_slice()))
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        if self.is_empty() {
            None
        } else {
            Some((self.breaks[0], *self.breaks.last().unwrap()))
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().map(|c| poly::degree(c)).max().unwrap_or(0)
    }

    fn segment_of(&self, t: f64) -> Option<usize> {
        if self.is_empty() || t < self.breaks[0] || t >= *self.breaks.last().unwrap() {
            return None;
        }
        // last index with breaks[i] <= t
        let i = self.breaks.partition_point(|&b| b <= t) - 1;
        Some(i.min(self.coeffs.len() - 1))
    }

    /// Value at `t`; a breakpoint takes the value of the segment to its right.
    pub fn eval(&self, t: f64) -> f64 {
        match self.segment_of(t) {
            Some(i) => poly::eval(&self.coeffs[i], t),
            None => 0.0,
        }
    }

    /// Left limit at `t`.
    pub fn eval_left(&self, t: f64) -> f64 {
        if self.is_empty() || t <= self.breaks[0] || t > *self.breaks.last().unwrap() {
            return 0.0;
        }
        let i = self.breaks.partition_point(|&b| b < t) - 1;
        poly::eval(&self.coeffs[i.min(self.coeffs.len() - 1)], t)
    }

    /// Exact integral over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64) -> Result<f64, NumericsError> {
        if a > b || a.is_nan() || b.is_nan() {
            return Err(NumericsError::InvalidInterval(a, b));
        }
        let mut total = 0.0;
        for (lo, hi, c) in self.segments() {
            let l = lo.max(a);
            let h = hi.min(b);
            if l >= h {
                continue;
            }
            if poly::is_zero(c) {
                continue;
            }
            if l.is_infinite() || h.is_infinite() {
                return Err(NumericsError::UnboundedIntegral);
            }
            let anti = poly::antiderivative(c);
            total += poly::eval(&anti, h) - poly::eval(&anti, l);
        }
        Ok(total)
    }

    /// Combines two functions segment by segment over the union of breakpoints.
    pub fn combine(&self, other: &Self, op: impl Fn(&[f64], &[f64]) -> Vec<f64>) -> Self {
        let mut breaks: Vec<f64> = self.breaks.iter().chain(other.breaks.iter()).copied().collect();
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let breaks = dedup_breaks(breaks);
        if breaks.len() < 2 {
            return Self::zero();
        }
        let zero = vec![0.0];
        let mut coeffs = Vec::with_capacity(breaks.len() - 1);
        for w in breaks.windows(2) {
            let probe = interior_point(w[0], w[1]);
            let ca = self.segment_of(probe).map(|i| self.coeffs[i].as_slice()).unwrap_or(&zero);
            let cb = other.segment_of(probe).map(|i| other.coeffs[i].as_slice()).unwrap_or(&zero);
            coeffs.push(poly::trim(op(ca, cb)));
        }
        Self { breaks, coeffs }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, poly::add)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, poly::sub)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            breaks: self.breaks.clone(),
            coeffs: self.coeffs.iter().map(|c| poly::scale(c, k)).collect(),
        }
    }

    /// `t ↦ f(t + h)`.
    pub fn shifted(&self, h: f64) -> Self {
        Self {
            breaks: self.breaks.iter().map(|b| b - h).collect(),
            coeffs: self.coeffs.iter().map(|c| poly::shift(c, h)).collect(),
        }
    }

    /// Drops zero segments at both ends.
    pub fn trimmed(&self) -> Self {
        let first = self.coeffs.iter().position(|c| !poly::is_zero(c));
        let Some(first) = first else {
            return Self::zero();
        };
        let last = self.coeffs.iter().rposition(|c| !poly::is_zero(c)).unwrap();
        Self {
            breaks: self.breaks[first..=last + 1].to_vec(),
            coeffs: self.coeffs[first..=last].to_vec(),
        }
    }

    /// Continuous antiderivative, zero at the left end of the support and
    /// constant to the right of it.
    pub fn antiderivative(&self) -> Result<Self, NumericsError> {
        let f = self.trimmed();
        if f.is_empty() {
            return Ok(Self::zero());
        }
        if f.breaks[0].is_infinite() {
            return Err(NumericsError::UnboundedIntegral);
        }
        let mut breaks = f.breaks.clone();
        let mut coeffs = Vec::with_capacity(f.coeffs.len() + 1);
        let mut acc = 0.0;
        for (lo, hi, c) in f.segments() {
            let anti = poly::antiderivative(c);
            let offset = acc - poly::eval(&anti, lo);
            coeffs.push(poly::add(&anti, &[offset]));
            if hi.is_finite() {
                acc += poly::eval(&anti, hi) - poly::eval(&anti, lo);
            }
        }
        if breaks.last().unwrap().is_finite() {
            breaks.push(f64::INFINITY);
            coeffs.push(vec![acc]);
        }
        Self::new(breaks, coeffs)
    }

    /// Unit-interval moving average `t ↦ ∫_{t−1/2}^{t+1/2} f`.
    pub fn unit_average(&self) -> Result<Self, NumericsError> {
        let f = self.trimmed();
        if f.is_empty() {
            return Ok(Self::zero());
        }
        let mut breaks: Vec<f64> = Vec::with_capacity(2 * f.breaks.len());
        for &b in &f.breaks {
            breaks.push(b - 0.5);
            breaks.push(b + 0.5);
        }
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let breaks = dedup_breaks(breaks);
        let antis: Vec<Vec<f64>> = f.coeffs.iter().map(|c| poly::antiderivative(c)).collect();
        let mut coeffs = Vec::with_capacity(breaks.len() - 1);
        for w in breaks.windows(2) {
            let s = interior_point(w[0], w[1]);
            let (lo_w, hi_w) = (s - 0.5, s + 0.5);
            let mut acc = vec![0.0];
            for (i, (lo, hi, c)) in f.segments().enumerate() {
                if hi <= lo_w || lo >= hi_w || poly::is_zero(c) {
                    continue;
                }
                let a = &antis[i];
                // upper limit: hi if the segment ends inside the window, else t + 1/2
                let upper = if hi <= hi_w {
                    if hi.is_infinite() {
                        return Err(NumericsError::UnboundedIntegral);
                    }
                    vec![poly::eval(a, hi)]
                } else {
                    poly::shift(a, 0.5)
                };
                let lower = if lo >= lo_w {
                    if lo.is_infinite() {
                        return Err(NumericsError::UnboundedIntegral);
                    }
                    vec![poly::eval(a, lo)]
                } else {
                    poly::shift(a, -0.5)
                };
                acc = poly::add(&acc, &poly::sub(&upper, &lower));
            }
            coeffs.push(acc);
        }
        Ok(Self::new(breaks, coeffs)?.trimmed())
    }
}

/// A finite point strictly inside `(lo, hi)`.
fn interior_point(lo: f64, hi: f64) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo + 1.0,
        (false, true) => hi - 1.0,
        (false, false) => 0.0,
    }
}

/// Merges sorted breakpoints closer than [`BREAK_TOL`].
pub fn dedup_breaks(sorted: Vec<f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(sorted.len());
    for b in sorted {
        match out.last() {
            Some(&l) if b == l || (b.is_finite() && l.is_finite() && b - l <= BREAK_TOL) => {}
            _ => out.push(b),
        }
    }
    out
}
