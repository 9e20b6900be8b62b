//! Dense two-phase tableau simplex.
//!
//! Entering columns use Dantzig's rule and fall back to Bland's rule during
//! long runs of degenerate pivots, so the method terminates. Leaving rows
//! are chosen by the minimum ratio with ties broken by smallest basic index.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RowRelation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: RowRelation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, relation: RowRelation, rhs: f64) -> Self {
        Self { coeffs, relation, rhs }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarBound {
    pub lower: f64,
    pub upper: f64,
}

impl VarBound {
    pub const FREE: VarBound = VarBound { lower: f64::NEG_INFINITY, upper: f64::INFINITY };
    pub const NON_NEGATIVE: VarBound = VarBound { lower: 0.0, upper: f64::INFINITY };

    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }
}

/// `minimize c.x` subject to the rows and the variable bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<VarBound>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective_value: f64,
    /// One multiplier per constraint, `y = c_B B^{-1}` of the final basis.
    /// At an optimum `sum_i y_i rhs_i` equals the objective when every
    /// variable has a zero lower bound.
    pub duals: Vec<f64>,
    pub pivots: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions {
    pub max_pivots: usize,
    /// Reduced costs above `-cost_tol` count as non-negative.
    pub cost_tol: f64,
    /// Column entries at or below this are not pivot candidates.
    pub pivot_tol: f64,
    /// Phase-one objective tolerance, relative to the largest `|rhs|`.
    pub feasibility_tol: f64,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_streak: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self { max_pivots: 1_000_000, cost_tol: 1e-11, pivot_tol: 1e-10, feasibility_tol: 1e-9, degenerate_streak: 50 }
    }
}

/// How an original variable maps onto non-negative tableau columns.
#[derive(Debug, Clone, Copy)]
enum Map {
    /// `x = offset + z`
    Shift { col: usize, offset: f64 },
    /// `x = offset - z`
    Flip { col: usize, offset: f64 },
    /// `x = z_plus - z_minus`
    Split { plus: usize, minus: usize },
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows x (cols + 1)`, the last column holds the right-hand side.
    a: Vec<f64>,
    /// Initial tableau, kept for refactorisation.
    orig: Vec<f64>,
    basis: Vec<usize>,
    cost: Vec<f64>,
    /// Negated objective value.
    cost_rhs: f64,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
    Limit,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cols + 1
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.width() + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.a[r * self.width() + self.cols]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width();
        let inv = 1.0 / self.a[pr * w + pc];
        for v in &mut self.a[pr * w..(pr + 1) * w] {
            *v *= inv;
        }
        self.a[pr * w + pc] = 1.0;
        let pivot_row: Vec<f64> = self.a[pr * w..(pr + 1) * w].to_vec();
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let factor = self.a[r * w + pc];
            if factor != 0.0 {
                let row = &mut self.a[r * w..(r + 1) * w];
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
                row[pc] = 0.0;
            }
        }
        let factor = self.cost[pc];
        if factor != 0.0 {
            for (c, p) in self.cost.iter_mut().zip(&pivot_row[..self.cols]) {
                *c -= factor * p;
            }
            self.cost[pc] = 0.0;
            self.cost_rhs -= factor * pivot_row[self.cols];
        }
        self.basis[pr] = pc;
    }

    /// Rebuilds the tableau for the current basis from the original data by
    /// Gauss-Jordan elimination with partial pivoting, discarding the
    /// rounding accumulated over many pivots. Returns false if the basis
    /// matrix is numerically singular, leaving the tableau unchanged.
    fn refactor(&mut self) -> bool {
        let (m, w) = (self.rows, self.width());
        let mut a = self.orig.clone();
        let mut used = vec![false; m];
        let mut basis = vec![usize::MAX; m];
        for &col in &self.basis {
            let Some(pr) = (0..m)
                .filter(|&r| !used[r])
                .max_by(|&p, &q| a[p * w + col].abs().total_cmp(&a[q * w + col].abs()))
            else {
                return false;
            };
            let piv = a[pr * w + col];
            if piv.abs() < 1e-12 {
                return false;
            }
            for v in &mut a[pr * w..(pr + 1) * w] {
                *v /= piv;
            }
            let pivot_row: Vec<f64> = a[pr * w..(pr + 1) * w].to_vec();
            for r in 0..m {
                let factor = a[r * w + col];
                if r != pr && factor != 0.0 {
                    for (v, p) in a[r * w..(r + 1) * w].iter_mut().zip(&pivot_row) {
                        *v -= factor * p;
                    }
                    a[r * w + col] = 0.0;
                }
            }
            used[pr] = true;
            basis[pr] = col;
        }
        self.a = a;
        self.basis = basis;
        true
    }

    /// Sets the cost row to `c - c_B B^{-1} A` for the current basis.
    fn price(&mut self, c: &[f64]) {
        self.cost = c.to_vec();
        self.cost_rhs = 0.0;
        for r in 0..self.rows {
            let cb = c[self.basis[r]];
            if cb != 0.0 {
                for j in 0..self.cols {
                    self.cost[j] -= cb * self.at(r, j);
                }
                self.cost_rhs -= cb * self.rhs(r);
            }
        }
    }

    fn run(&mut self, allowed: usize, opts: &LpOptions, pivots: &mut usize) -> PhaseOutcome {
        let mut streak = 0usize;
        loop {
            let bland = streak >= opts.degenerate_streak;
            let mut enter = None;
            let mut best = -opts.cost_tol;
            for j in 0..allowed {
                let d = self.cost[j];
                if d < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(pc) = enter else { return PhaseOutcome::Optimal };

            // minimum ratio; among ties Bland's rule takes the smallest basic
            // index, otherwise the largest pivot for stability
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let v = self.at(r, pc);
                if v > opts.pivot_tol {
                    let ratio = self.rhs(r).max(0.0) / v;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            let tie = (ratio - lratio).abs() <= 1e-12 * (1.0 + lratio.abs());
                            let better_tie = if bland {
                                self.basis[r] < self.basis[lr]
                            } else {
                                v > self.at(lr, pc)
                            };
                            if (tie && better_tie) || (!tie && ratio < lratio) {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let Some((pr, ratio)) = leave else { return PhaseOutcome::Unbounded };
            if *pivots >= opts.max_pivots {
                return PhaseOutcome::Limit;
            }
            streak = if ratio <= 1e-14 { streak + 1 } else { 0 };
            self.pivot(pr, pc);
            *pivots += 1;
        }
    }
}

/// Solves a linear program with the dense two-phase simplex method.
pub fn lp_solve(lp: &LinearProgram, opts: &LpOptions) -> Result<LpSolution> {
    let nvars = lp.objective.len();
    if lp.bounds.len() != nvars {
        return Err(Error::Lp(format!("{} bounds for {nvars} variables", lp.bounds.len())));
    }
    if lp.objective.iter().any(|v| !v.is_finite()) {
        return Err(Error::Lp("non-finite objective coefficient".into()));
    }
    for (i, c) in lp.constraints.iter().enumerate() {
        if c.coeffs.len() != nvars {
            return Err(Error::Lp(format!("row {i} has {} coefficients, expected {nvars}", c.coeffs.len())));
        }
        if c.coeffs.iter().any(|v| !v.is_finite()) || !c.rhs.is_finite() {
            return Err(Error::Lp(format!("row {i} has non-finite data")));
        }
    }

    // variable substitution onto non-negative columns
    let mut maps = Vec::with_capacity(nvars);
    let mut ncols = 0usize;
    let mut extra_rows: Vec<(usize, f64)> = Vec::new();
    for (i, b) in lp.bounds.iter().enumerate() {
        if b.lower.is_nan() || b.upper.is_nan() || b.lower > b.upper || b.lower == f64::INFINITY || b.upper == f64::NEG_INFINITY {
            return Err(Error::Lp(format!("invalid bounds for variable {i}")));
        }
        let m = if b.lower.is_finite() {
            if b.upper.is_finite() {
                extra_rows.push((ncols, b.upper - b.lower));
            }
            Map::Shift { col: ncols, offset: b.lower }
        } else if b.upper.is_finite() {
            Map::Flip { col: ncols, offset: b.upper }
        } else {
            ncols += 1;
            Map::Split { plus: ncols - 1, minus: ncols }
        };
        ncols += 1;
        maps.push(m);
    }
    let nz = ncols;

    // rows over z with non-negative rhs
    struct Row {
        coeffs: Vec<f64>,
        relation: RowRelation,
        rhs: f64,
        flipped: bool,
    }
    let mut rows = Vec::with_capacity(lp.constraints.len() + extra_rows.len());
    let transform = |coeffs: &[f64], rhs: f64| -> (Vec<f64>, f64) {
        let mut z = vec![0.0; nz];
        let mut r = rhs;
        for (a, m) in coeffs.iter().zip(&maps) {
            match *m {
                Map::Shift { col, offset } => {
                    z[col] += a;
                    r -= a * offset;
                }
                Map::Flip { col, offset } => {
                    z[col] -= a;
                    r -= a * offset;
                }
                Map::Split { plus, minus } => {
                    z[plus] += a;
                    z[minus] -= a;
                }
            }
        }
        (z, r)
    };
    for c in &lp.constraints {
        let (coeffs, rhs) = transform(&c.coeffs, c.rhs);
        rows.push(Row { coeffs, relation: c.relation, rhs, flipped: false });
    }
    for &(col, width) in &extra_rows {
        let mut coeffs = vec![0.0; nz];
        coeffs[col] = 1.0;
        rows.push(Row { coeffs, relation: RowRelation::Le, rhs: width, flipped: false });
    }
    for r in &mut rows {
        if r.rhs < 0.0 {
            r.rhs = -r.rhs;
            r.flipped = true;
            r.coeffs.iter_mut().for_each(|v| *v = -*v);
            r.relation = match r.relation {
                RowRelation::Le => RowRelation::Ge,
                RowRelation::Ge => RowRelation::Le,
                RowRelation::Eq => RowRelation::Eq,
            };
        }
    }

    let m = rows.len();
    let nslack = rows.iter().filter(|r| r.relation != RowRelation::Eq).count();
    let nart = rows.iter().filter(|r| r.relation != RowRelation::Le).count();
    let cols = nz + nslack + nart;
    let w = cols + 1;
    let mut a = vec![0.0; m * w];
    let mut basis = vec![0; m];
    let (mut s, mut t) = (nz, nz + nslack);
    for (i, r) in rows.iter().enumerate() {
        a[i * w..i * w + nz].copy_from_slice(&r.coeffs);
        a[i * w + cols] = r.rhs;
        match r.relation {
            RowRelation::Le => {
                a[i * w + s] = 1.0;
                basis[i] = s;
                s += 1;
            }
            RowRelation::Ge => {
                a[i * w + s] = -1.0;
                s += 1;
                a[i * w + t] = 1.0;
                basis[i] = t;
                t += 1;
            }
            RowRelation::Eq => {
                a[i * w + t] = 1.0;
                basis[i] = t;
                t += 1;
            }
        }
    }
    // the initial basis is an identity, so its columns also read off y
    let identity = basis.clone();
    let mut tab = Tableau { rows: m, cols, orig: a.clone(), a, basis, cost: vec![0.0; cols], cost_rhs: 0.0 };
    let real = nz + nslack;
    let mut pivots = 0usize;

    let extract = |tab: &Tableau| -> Vec<f64> {
        let mut z = vec![0.0; cols];
        for r in 0..tab.rows {
            z[tab.basis[r]] = tab.rhs(r);
        }
        maps.iter()
            .map(|m| match *m {
                Map::Shift { col, offset } => offset + z[col],
                Map::Flip { col, offset } => offset - z[col],
                Map::Split { plus, minus } => z[plus] - z[minus],
            })
            .collect()
    };
    let objective_of = |x: &[f64]| lp.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>();
    let duals_of = |tab: &Tableau| -> Vec<f64> {
        (0..lp.constraints.len())
            .map(|i| {
                let y = -tab.cost[identity[i]];
                if rows[i].flipped {
                    -y
                } else {
                    y
                }
            })
            .collect()
    };

    if nart > 0 {
        let mut c1 = vec![0.0; cols];
        c1[real..].iter_mut().for_each(|v| *v = 1.0);
        tab.price(&c1);
        match tab.run(cols, opts, &mut pivots) {
            PhaseOutcome::Optimal => {}
            PhaseOutcome::Limit => {
                let x = extract(&tab);
                return Ok(LpSolution {
                    status: LpStatus::IterationLimit,
                    objective_value: objective_of(&x),
                    duals: vec![f64::NAN; lp.constraints.len()],
                    x,
                    pivots,
                });
            }
            // phase one is bounded below by zero
            PhaseOutcome::Unbounded => unreachable!("phase-one objective is bounded"),
        }
        let scale = 1.0 + rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
        if -tab.cost_rhs > opts.feasibility_tol * scale {
            let x = extract(&tab);
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                objective_value: objective_of(&x),
                duals: vec![f64::NAN; lp.constraints.len()],
                x,
                pivots,
            });
        }
        // drive zero-level artificials out where a real column allows it;
        // rows without one are redundant and stay inert
        for r in 0..m {
            if tab.basis[r] >= real {
                if let Some(j) = (0..real).find(|&j| tab.at(r, j).abs() > opts.pivot_tol) {
                    tab.pivot(r, j);
                    pivots += 1;
                }
            }
        }
    }

    let mut c2 = vec![0.0; cols];
    for (cv, mp) in lp.objective.iter().zip(&maps) {
        match *mp {
            Map::Shift { col, .. } => c2[col] += cv,
            Map::Flip { col, .. } => c2[col] -= cv,
            Map::Split { plus, minus } => {
                c2[plus] += cv;
                c2[minus] -= cv;
            }
        }
    }
    tab.price(&c2);
    let mut status = LpStatus::IterationLimit;
    // after an optimum, refactorise and re-price; resume if drift had hidden
    // an improving column
    for _ in 0..4 {
        status = match tab.run(real, opts, &mut pivots) {
            PhaseOutcome::Optimal => LpStatus::Optimal,
            PhaseOutcome::Unbounded => LpStatus::Unbounded,
            PhaseOutcome::Limit => LpStatus::IterationLimit,
        };
        if status != LpStatus::Optimal || !tab.refactor() {
            break;
        }
        tab.price(&c2);
        if tab.cost[..real].iter().all(|&d| d >= -opts.cost_tol) {
            break;
        }
    }
    let x = extract(&tab);
    let duals = duals_of(&tab);
    Ok(LpSolution { status, objective_value: objective_of(&x), duals, x, pivots })
}

/// Largest violation of the rows and bounds at `x`.
pub fn max_violation(lp: &LinearProgram, x: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for c in &lp.constraints {
        let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
        let v = match c.relation {
            RowRelation::Le => lhs - c.rhs,
            RowRelation::Ge => c.rhs - lhs,
            RowRelation::Eq => (lhs - c.rhs).abs(),
        };
        worst = worst.max(v);
    }
    for (b, v) in lp.bounds.iter().zip(x) {
        worst = worst.max(b.lower - v).max(v - b.upper);
    }
    worst
}
