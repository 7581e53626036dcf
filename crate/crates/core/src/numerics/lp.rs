//! Dense revised simplex for small linear programs.
//!
//! The model is converted to `min cᵀz, Az = b, z ≥ 0` with slacks and
//! artificials, solved in two phases with an explicit basis inverse, and
//! mapped back. Dantzig pricing switches to Bland's rule after a run of
//! degenerate pivots.

use super::NumericsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    direction: Direction,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<LpRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point (empty unless optimal).
    pub x: Vec<f64>,
    pub objective: f64,
    /// Row duals in the sign convention of the original direction (empty unless optimal).
    pub duals: Vec<f64>,
    pub iterations: usize,
}

impl LinearProgram {
    /// `n_vars` variables with zero cost and bounds `[0, ∞)`.
    pub fn new(direction: Direction, n_vars: usize) -> Self {
        Self {
            direction,
            cost: vec![0.0; n_vars],
            lower: vec![0.0; n_vars],
            upper: vec![f64::INFINITY; n_vars],
            rows: Vec::new(),
        }
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[LpRow] {
        &self.rows
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    pub fn set_cost(&mut self, j: usize, c: f64) {
        self.cost[j] = c;
    }

    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lower[j] = lo;
        self.upper[j] = hi;
    }

    /// Adds a variable and returns its index.
    pub fn add_var(&mut self, cost: f64, lo: f64, hi: f64) -> usize {
        self.cost.push(cost);
        self.lower.push(lo);
        self.upper.push(hi);
        self.cost.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, sense: RowSense, rhs: f64) -> usize {
        self.rows.push(LpRow { coeffs, sense, rhs });
        self.rows.len() - 1
    }

    pub fn add_dense_row(&mut self, coeffs: &[f64], sense: RowSense, rhs: f64) -> usize {
        let sparse = coeffs.iter().enumerate().filter(|(_, &a)| a != 0.0).map(|(j, &a)| (j, a)).collect();
        self.add_row(sparse, sense, rhs)
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        let n = self.num_vars();
        for j in 0..n {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if !self.cost[j].is_finite() {
                return Err(NumericsError::InvalidModel(format!("cost {j} is not finite")));
            }
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(NumericsError::InvalidModel(format!("bad bounds on variable {j}: [{lo}, {hi}]")));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(NumericsError::InvalidModel(format!("rhs of row {i} is not finite")));
            }
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(NumericsError::InvalidModel(format!("row {i} references variable {j}")));
                }
                if !a.is_finite() {
                    return Err(NumericsError::InvalidModel(format!("row {i} has a non-finite coefficient")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// x = lo + z
    Shift { col: usize, lo: f64 },
    /// x = hi − z
    Flip { col: usize, hi: f64 },
    /// x = z⁺ − z⁻
    Split { pos: usize, neg: usize },
}

const PIVOT_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-9;
const DEGENERATE_RUN: usize = 50;

struct Simplex {
    m: usize,
    columns: Vec<Vec<(usize, f64)>>,
    artificial: Vec<bool>,
    b: Vec<f64>,
    binv: Vec<f64>,
    basis: Vec<usize>,
    position: Vec<Option<usize>>,
    xb: Vec<f64>,
    iterations: usize,
    max_iterations: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

impl Simplex {
    fn row(&self, r: usize) -> &[f64] {
        &self.binv[r * self.m..(r + 1) * self.m]
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for r in 0..m {
            let c = cost[self.basis[r]];
            if c == 0.0 {
                continue;
            }
            for (yi, &v) in y.iter_mut().zip(self.row(r)) {
                *yi += c * v;
            }
        }
        y
    }

    fn ftran(&self, col: usize) -> Vec<f64> {
        let m = self.m;
        let mut w = vec![0.0; m];
        for &(i, v) in &self.columns[col] {
            for (r, wr) in w.iter_mut().enumerate() {
                *wr += self.binv[r * m + i] * v;
            }
        }
        w
    }

    fn reduced_cost(&self, cost: &[f64], y: &[f64], j: usize) -> f64 {
        cost[j] - self.columns[j].iter().map(|&(i, v)| y[i] * v).sum::<f64>()
    }

    fn pivot(&mut self, r: usize, entering: usize, w: &[f64]) {
        let m = self.m;
        let wr = w[r];
        let theta = self.xb[r] / wr;
        for (i, &wi) in w.iter().enumerate() {
            if i != r && wi != 0.0 {
                self.xb[i] -= theta * wi;
                if self.xb[i].abs() < 1e-12 {
                    self.xb[i] = 0.0;
                }
            }
        }
        self.xb[r] = theta;
        let inv = 1.0 / wr;
        for v in &mut self.binv[r * m..(r + 1) * m] {
            *v *= inv;
        }
        let pivot_row: Vec<f64> = self.row(r).to_vec();
        for (i, &wi) in w.iter().enumerate() {
            if i == r || wi == 0.0 {
                continue;
            }
            let row = &mut self.binv[i * m..(i + 1) * m];
            for (a, &p) in row.iter_mut().zip(&pivot_row) {
                *a -= wi * p;
            }
        }
        let leaving = self.basis[r];
        self.position[leaving] = None;
        self.position[entering] = Some(r);
        self.basis[r] = entering;
    }

    /// Rebuilds the basis inverse from scratch by Gauss–Jordan elimination.
    fn refactor(&mut self) -> Result<(), NumericsError> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (r, &col) in self.basis.iter().enumerate() {
            for &(i, v) in &self.columns[col] {
                a[i * m + r] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for k in 0..m {
            let (p, best) = (k..m)
                .map(|i| (i, a[i * m + k].abs()))
                .fold((k, -1.0), |acc, it| if it.1 > acc.1 { it } else { acc });
            if best < 1e-11 {
                return Err(NumericsError::SingularBasis);
            }
            if p != k {
                for j in 0..m {
                    a.swap(p * m + j, k * m + j);
                    inv.swap(p * m + j, k * m + j);
                }
            }
            let d = 1.0 / a[k * m + k];
            for j in 0..m {
                a[k * m + j] *= d;
                inv[k * m + j] *= d;
            }
            for i in 0..m {
                if i == k {
                    continue;
                }
                let f = a[i * m + k];
                if f == 0.0 {
                    continue;
                }
                for j in 0..m {
                    a[i * m + j] -= f * a[k * m + j];
                    inv[i * m + j] -= f * inv[k * m + j];
                }
            }
        }
        self.binv = inv;
        for r in 0..m {
            self.xb[r] = self.row(r).iter().zip(&self.b).map(|(x, y)| x * y).sum();
            if self.xb[r].abs() < 1e-12 {
                self.xb[r] = 0.0;
            }
        }
        Ok(())
    }

    fn residual(&self) -> f64 {
        let mut r = self.b.clone();
        for (row, &col) in self.basis.iter().enumerate() {
            for &(i, v) in &self.columns[col] {
                r[i] -= v * self.xb[row];
            }
        }
        r.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }

    fn run(&mut self, cost: &[f64], allowed: &dyn Fn(usize) -> bool) -> Result<PhaseEnd, NumericsError> {
        let n = self.columns.len();
        let scale = 1.0 + self.b.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
        let mut y = self.duals(cost);
        let mut degenerate = 0usize;
        let mut since_refresh = 0usize;
        let mut refactors_at_optimum = 0usize;
        loop {
            if self.iterations >= self.max_iterations {
                return Err(NumericsError::IterationLimit(self.iterations));
            }
            if since_refresh >= 64 {
                y = self.duals(cost);
                since_refresh = 0;
            }
            let bland = degenerate >= DEGENERATE_RUN;
            let mut entering = None;
            let mut best = -OPT_TOL;
            for j in 0..n {
                if self.position[j].is_some() || !allowed(j) {
                    continue;
                }
                let d = self.reduced_cost(cost, &y, j);
                if d < best {
                    entering = Some((j, d));
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some((q, dq)) = entering else {
                // Confirm with fresh duals and a residual check before stopping.
                let fresh = self.duals(cost);
                let stale = (0..n)
                    .filter(|&j| self.position[j].is_none() && allowed(j))
                    .any(|j| self.reduced_cost(cost, &fresh, j) < -OPT_TOL);
                if stale {
                    y = fresh;
                    since_refresh = 0;
                    continue;
                }
                if self.residual() > 1e-9 * scale && refactors_at_optimum < 3 {
                    self.refactor()?;
                    refactors_at_optimum += 1;
                    y = self.duals(cost);
                    continue;
                }
                return Ok(PhaseEnd::Optimal);
            };
            let w = self.ftran(q);
            // Harris-style two-pass ratio test.
            let mut bound = f64::INFINITY;
            for (i, &wi) in w.iter().enumerate() {
                if wi > PIVOT_TOL {
                    bound = bound.min((self.xb[i].max(0.0) + FEAS_TOL) / wi);
                }
            }
            if bound == f64::INFINITY {
                return Ok(PhaseEnd::Unbounded);
            }
            let mut leave: Option<usize> = None;
            for (i, &wi) in w.iter().enumerate() {
                if wi <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.xb[i].max(0.0) / wi;
                if ratio > bound {
                    continue;
                }
                leave = match leave {
                    None => Some(i),
                    Some(l) if bland => {
                        let rl = self.xb[l].max(0.0) / w[l];
                        if ratio < rl || (ratio == rl && self.basis[i] < self.basis[l]) {
                            Some(i)
                        } else {
                            Some(l)
                        }
                    }
                    Some(l) => {
                        if wi > w[l] {
                            Some(i)
                        } else {
                            Some(l)
                        }
                    }
                };
            }
            let r = leave.expect("ratio test found a bounded row");
            if self.xb[r] < 0.0 {
                self.xb[r] = 0.0;
            }
            let theta = self.xb[r] / w[r];
            degenerate = if theta <= 1e-12 { degenerate + 1 } else { 0 };
            self.pivot(r, q, &w);
            let row_r = self.row(r).to_vec();
            for (yi, v) in y.iter_mut().zip(row_r) {
                *yi += dq * v;
            }
            self.iterations += 1;
            since_refresh += 1;
            refactors_at_optimum = 0;
            if self.iterations % 500 == 0 && self.residual() > 1e-9 * scale {
                self.refactor()?;
                y = self.duals(cost);
            }
        }
    }
}

/// Solves `lp`. Infeasible and unbounded models are reported through
/// [`LpStatus`]; malformed models and numerical breakdowns are errors.
pub fn lp_solve(lp: &LinearProgram) -> Result<LpSolution, NumericsError> {
    lp.validate()?;
    let n = lp.num_vars();
    let sign = match lp.direction {
        Direction::Minimize => 1.0,
        Direction::Maximize => -1.0,
    };

    // Standard-form columns and the map back to the original variables.
    let mut col_cost: Vec<f64> = Vec::new();
    let mut maps = Vec::with_capacity(n);
    let mut upper_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        let c = sign * lp.cost[j];
        if lo.is_finite() {
            let col = col_cost.len();
            col_cost.push(c);
            maps.push(VarMap::Shift { col, lo });
            if hi.is_finite() {
                upper_rows.push((col, hi - lo));
            }
        } else if hi.is_finite() {
            let col = col_cost.len();
            col_cost.push(-c);
            maps.push(VarMap::Flip { col, hi });
        } else {
            let pos = col_cost.len();
            col_cost.push(c);
            col_cost.push(-c);
            maps.push(VarMap::Split { pos, neg: pos + 1 });
        }
    }

    // Rows in terms of standard columns.
    let mut rows: Vec<(Vec<(usize, f64)>, RowSense, f64)> = Vec::new();
    for row in &lp.rows {
        let mut entries = Vec::with_capacity(row.coeffs.len());
        let mut rhs = row.rhs;
        for &(j, a) in &row.coeffs {
            if a == 0.0 {
                continue;
            }
            match maps[j] {
                VarMap::Shift { col, lo } => {
                    entries.push((col, a));
                    rhs -= a * lo;
                }
                VarMap::Flip { col, hi } => {
                    entries.push((col, -a));
                    rhs -= a * hi;
                }
                VarMap::Split { pos, neg } => {
                    entries.push((pos, a));
                    entries.push((neg, -a));
                }
            }
        }
        rows.push((entries, row.sense, rhs));
    }
    for &(col, ub) in &upper_rows {
        rows.push((vec![(col, 1.0)], RowSense::Le, ub));
    }

    let m = rows.len();
    let n_struct = col_cost.len();
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_struct];
    let mut flip = vec![1.0; m];
    let mut basis = vec![usize::MAX; m];
    let mut b = vec![0.0; m];
    let mut artificial = vec![false; n_struct];
    let mut cost = col_cost.clone();
    for (r, (entries, sense, rhs)) in rows.iter().enumerate() {
        let f = if *rhs < 0.0 { -1.0 } else { 1.0 };
        flip[r] = f;
        b[r] = f * rhs;
        for &(col, a) in entries {
            columns[col].push((r, f * a));
        }
        let slack = match sense {
            RowSense::Le => Some(1.0),
            RowSense::Ge => Some(-1.0),
            RowSense::Eq => None,
        };
        if let Some(s) = slack {
            let col = columns.len();
            columns.push(vec![(r, f * s)]);
            cost.push(0.0);
            artificial.push(false);
            if f * s > 0.0 {
                basis[r] = col;
            }
        }
    }
    // Merge duplicate entries of a column in the same row.
    for col in columns.iter_mut() {
        col.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(col.len());
        for &(i, v) in col.iter() {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => merged.push((i, v)),
            }
        }
        merged.retain(|e| e.1 != 0.0);
        *col = merged;
    }
    let mut phase1_cost = vec![0.0; columns.len()];
    for r in 0..m {
        if basis[r] == usize::MAX {
            let col = columns.len();
            columns.push(vec![(r, 1.0)]);
            cost.push(0.0);
            phase1_cost.push(1.0);
            artificial.push(true);
            basis[r] = col;
        }
    }
    let total = columns.len();
    let mut position = vec![None; total];
    for (r, &col) in basis.iter().enumerate() {
        position[col] = Some(r);
    }
    let mut binv = vec![0.0; m * m];
    for r in 0..m {
        // initial basic columns are unit vectors e_r
        binv[r * m + r] = 1.0;
    }
    let mut sx = Simplex {
        m,
        columns,
        artificial,
        xb: b.clone(),
        b,
        binv,
        basis,
        position,
        iterations: 0,
        max_iterations: 20_000 + 50 * (m + total),
    };

    let infeasible = |iterations| LpSolution {
        status: LpStatus::Infeasible,
        x: Vec::new(),
        objective: f64::NAN,
        duals: Vec::new(),
        iterations,
    };

    if sx.artificial.iter().any(|&a| a) {
        match sx.run(&phase1_cost, &|_| true)? {
            PhaseEnd::Unbounded => return Err(NumericsError::SingularBasis),
            PhaseEnd::Optimal => {}
        }
        let scale = 1.0 + sx.b.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
        let infeas: f64 = (0..m).filter(|&r| sx.artificial[sx.basis[r]]).map(|r| sx.xb[r].max(0.0)).sum();
        if infeas > 1e-7 * scale {
            return Ok(infeasible(sx.iterations));
        }
        // Pivot zero-level artificials out of the basis where possible.
        for r in 0..m {
            if !sx.artificial[sx.basis[r]] {
                continue;
            }
            sx.xb[r] = 0.0;
            let rho = sx.row(r).to_vec();
            let candidate = (0..sx.columns.len())
                .filter(|&j| !sx.artificial[j] && sx.position[j].is_none())
                .map(|j| (j, sx.columns[j].iter().map(|&(i, v)| rho[i] * v).sum::<f64>()))
                .filter(|&(_, a)| a.abs() > 1e-7)
                .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap());
            if let Some((j, _)) = candidate {
                let w = sx.ftran(j);
                sx.pivot(r, j, &w);
            }
        }
    }

    let art = sx.artificial.clone();
    let end = sx.run(&cost, &|j| !art[j])?;
    if let PhaseEnd::Unbounded = end {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            x: Vec::new(),
            objective: sign * f64::NEG_INFINITY,
            duals: Vec::new(),
            iterations: sx.iterations,
        });
    }

    let mut z = vec![0.0; sx.columns.len()];
    for (r, &col) in sx.basis.iter().enumerate() {
        z[col] = sx.xb[r].max(0.0);
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            VarMap::Shift { col, lo } => lo + z[col],
            VarMap::Flip { col, hi } => hi - z[col],
            VarMap::Split { pos, neg } => z[pos] - z[neg],
        })
        .collect();
    let objective = lp.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
    let y = sx.duals(&cost);
    let duals = (0..lp.rows.len()).map(|r| sign * flip[r] * y[r]).collect();
    Ok(LpSolution { status: LpStatus::Optimal, x, objective, duals, iterations: sx.iterations })
}
