//! Dense univariate polynomials stored as ascending coefficient vectors.

/// Evaluates `c[0] + c[1] t + ...` by Horner's rule.
pub fn eval(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
}

pub fn is_zero(c: &[f64]) -> bool {
    c.iter().all(|&a| a == 0.0)
}

/// Degree ignoring trailing zero coefficients; the zero polynomial has degree 0.
pub fn degree(c: &[f64]) -> usize {
    c.iter().rposition(|&a| a != 0.0).unwrap_or(0)
}

pub fn trim(mut c: Vec<f64>) -> Vec<f64> {
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    if c.is_empty() {
        c.push(0.0);
    }
    c
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| a.get(i).copied().unwrap_or(0.0) + b.get(i).copied().unwrap_or(0.0))
        .collect();
    trim(out)
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0))
        .collect();
    trim(out)
}

pub fn scale(a: &[f64], k: f64) -> Vec<f64> {
    trim(a.iter().map(|&x| x * k).collect())
}

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return vec![0.0];
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    if c.len() <= 1 {
        return vec![0.0];
    }
    trim(c.iter().enumerate().skip(1).map(|(i, &a)| a * i as f64).collect())
}

/// Antiderivative with zero constant term.
pub fn antiderivative(c: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(c.len() + 1);
    out.push(0.0);
    out.extend(c.iter().enumerate().map(|(i, &a)| a / (i as f64 + 1.0)));
    trim(out)
}

/// Coefficients of `t ↦ p(t + h)`.
pub fn shift(c: &[f64], h: f64) -> Vec<f64> {
    let n = c.len();
    let mut out = vec![0.0; n];
    // Binomial expansion of (t + h)^k.
    for (k, &a) in c.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let mut binom = 1.0;
        let mut hp = 1.0;
        // term j: C(k, j) h^(k-j) t^j, walk j from k down to 0
        for j in (0..=k).rev() {
            out[j] += a * binom * hp;
            binom = binom * j as f64 / (k - j + 1) as f64;
            hp *= h;
        }
    }
    trim(out)
}

/// Real roots of `c` inside `[a, b]`, sorted, found by isolating monotone
/// pieces between the roots of the derivative and bisecting each.
pub fn roots_in(c: &[f64], a: f64, b: f64) -> Vec<f64> {
    let c = trim(c.to_vec());
    let deg = degree(&c);
    if a > b {
        return Vec::new();
    }
    if deg == 0 {
        return Vec::new();
    }
    if deg == 1 {
        let r = -c[0] / c[1];
        return if r >= a && r <= b { vec![r] } else { Vec::new() };
    }
    let mut cuts = vec![a];
    cuts.extend(roots_in(&derivative(&c), a, b));
    cuts.push(b);
    let mut out: Vec<f64> = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (flo, fhi) = (eval(&c, lo), eval(&c, hi));
        let r = if flo == 0.0 {
            Some(lo)
        } else if fhi == 0.0 {
            Some(hi)
        } else if (flo < 0.0) != (fhi < 0.0) {
            Some(bisect(&c, lo, hi, flo))
        } else {
            None
        };
        if let Some(r) = r {
            if out.last().is_none_or(|&l| r - l > 1e-13) {
                out.push(r);
            }
        }
    }
    out
}

fn bisect(c: &[f64], mut lo: f64, mut hi: f64, flo: f64) -> f64 {
    let neg_lo = flo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = eval(c, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
