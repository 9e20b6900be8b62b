//! Discretised minimax approximation by trigonometric polynomials, with
//! optional comonotonicity constraints, solved as a linear program.

use std::f64::consts::PI;

use serde::Serialize;

use super::lp::{lp_solve, Constraint, LinearProgram, LpOptions, LpStatus, RowRelation, VarBound};
use crate::construction::NodeSet;
use crate::error::{Error, Result};
use crate::numerics::TWO_PI;
use crate::trig::TrigPoly;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PatternInterval {
    pub left: f64,
    pub right: f64,
    /// `+1` for non-decreasing, `-1` for non-increasing.
    pub sign: f64,
}

/// Alternating monotonicity pattern over one period.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityPattern {
    intervals: Vec<PatternInterval>,
}

impl MonotonicityPattern {
    /// Intervals listed by label, `[y_1, y_0]` first. Signs must alternate
    /// starting with `+1` and the intervals must tile one period.
    pub fn new(intervals: Vec<PatternInterval>) -> Result<Self> {
        if intervals.is_empty() || !intervals.len().is_multiple_of(2) {
            return Err(Error::InvalidNodes(format!("{} intervals, expected a positive even count", intervals.len())));
        }
        for (i, iv) in intervals.iter().enumerate() {
            let expected = if i % 2 == 0 { 1.0 } else { -1.0 };
            if iv.sign != expected {
                return Err(Error::InvalidNodes(format!("interval {} has sign {}", i + 1, iv.sign)));
            }
            if iv.left.partial_cmp(&iv.right) != Some(std::cmp::Ordering::Less) {
                return Err(Error::InvalidNodes(format!("interval {} is empty", i + 1)));
            }
            if i > 0 && (intervals[i - 1].left - iv.right).abs() > 1e-12 {
                return Err(Error::InvalidNodes(format!("interval {} does not abut interval {i}", i + 1)));
            }
        }
        let span = intervals[0].right - intervals[intervals.len() - 1].left;
        if (span - TWO_PI).abs() > 1e-12 {
            return Err(Error::InvalidNodes(format!("intervals cover {span}, not one period")));
        }
        Ok(Self { intervals })
    }

    /// Pattern in the normalised frame the construction works in.
    pub fn from_nodes(nodes: &NodeSet) -> Self {
        Self::shifted(nodes, 0.0)
    }

    /// Pattern in the coordinates the nodes were originally given in.
    pub fn from_nodes_original(nodes: &NodeSet) -> Self {
        Self::shifted(nodes, nodes.shift())
    }

    fn shifted(nodes: &NodeSet, shift: f64) -> Self {
        let intervals = nodes
            .intervals()
            .iter()
            .map(|iv| PatternInterval { left: iv.left + shift, right: iv.right + shift, sign: iv.sign })
            .collect();
        Self { intervals }
    }

    pub fn intervals(&self) -> &[PatternInterval] {
        &self.intervals
    }
}

/// Discretisation grids for one approximation problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxGrids {
    pub error: Vec<f64>,
    pub shape: Vec<Vec<f64>>,
    pub fine_error: Vec<f64>,
    pub fine_shape: Vec<Vec<f64>>,
}

fn uniform_period(points: usize) -> Vec<f64> {
    (0..points).map(|j| -PI + TWO_PI * j as f64 / points as f64).collect()
}

/// `total` points spread over the intervals in proportion to their length,
/// at least two per interval, endpoints included.
fn shape_points(pattern: &MonotonicityPattern, total: usize) -> Vec<Vec<f64>> {
    pattern
        .intervals()
        .iter()
        .map(|iv| {
            let share = ((iv.right - iv.left) / TWO_PI * total as f64).round() as usize;
            let count = share.max(2);
            (0..count).map(|j| iv.left + (iv.right - iv.left) * j as f64 / (count - 1) as f64).collect()
        })
        .collect()
}

impl ApproxGrids {
    /// `mult (n + 1)` error and shape points, check grids ten times denser.
    pub fn standard(n: usize, pattern: Option<&MonotonicityPattern>, mult: usize) -> Result<Self> {
        let count = mult * (n + 1);
        let required = 2 * (2 * n + 2);
        if count < required {
            return Err(Error::GridTooSmall { points: count, required });
        }
        let (shape, fine_shape) = match pattern {
            Some(p) => (shape_points(p, count), shape_points(p, 10 * count)),
            None => (Vec::new(), Vec::new()),
        };
        Ok(Self { error: uniform_period(count), shape, fine_error: uniform_period(10 * count), fine_shape })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxResult {
    pub poly: TrigPoly,
    /// Largest error of the fitted polynomial on the error grid.
    pub epsilon: f64,
    /// Optimal value reported by the solver; agrees with `epsilon` up to
    /// rounding.
    pub lp_objective: f64,
    /// `max |f - tau|` on the fine grid.
    pub true_error_estimate: f64,
    /// `max(0, max -sigma tau')` on the fine shape grids.
    pub shape_violation: f64,
    pub status: LpStatus,
    pub pivots: usize,
}

fn basis_row(n: usize, x: f64) -> Vec<f64> {
    let mut row = vec![0.0; 2 * n + 1];
    row[0] = 1.0;
    for k in 1..=n {
        let (s, c) = (k as f64 * x).sin_cos();
        row[k] = c;
        row[n + k] = s;
    }
    row
}

fn derivative_row(n: usize, x: f64) -> Vec<f64> {
    let mut row = vec![0.0; 2 * n + 1];
    for k in 1..=n {
        let kf = k as f64;
        let (s, c) = (kf * x).sin_cos();
        row[k] = -kf * s;
        row[n + k] = kf * c;
    }
    row
}

fn solve_minimax<F: Fn(f64) -> f64>(
    f: F,
    n: usize,
    pattern: Option<&MonotonicityPattern>,
    grids: &ApproxGrids,
) -> Result<ApproxResult> {
    let values: Vec<f64> = grids.error.iter().map(|&x| f(x)).collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { x: grids.error[i] });
    }
    if grids.error.len() < 2 * (2 * n + 2) {
        return Err(Error::GridTooSmall { points: grids.error.len(), required: 2 * (2 * n + 2) });
    }
    // Primal: minimise e over (coefficients, e), all free, subject to
    //   tau(x_j) - e <= f_j + eps0,  -tau(x_j) - e <= eps0 - f_j,
    //   -sigma tau'(u) / n <= 0.
    // The level shift eps0 = max |f_j| keeps every right-hand side
    // non-negative. It is solved through its dual, which has one equality
    // row per primal variable and is far smaller as a tableau; the
    // coefficients are the dual's multipliers.
    let eps0 = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let nv = 2 * n + 2;
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::with_capacity(2 * values.len());
    for (&x, &fx) in grids.error.iter().zip(&values) {
        let mut row = basis_row(n, x);
        row.push(-1.0);
        rows.push((row.clone(), fx + eps0));
        row.iter_mut().take(nv - 1).for_each(|v| *v = -*v);
        rows.push((row, eps0 - fx));
    }
    if let Some(p) = pattern {
        if grids.shape.len() != p.intervals().len() || grids.shape.iter().any(|g| g.is_empty()) {
            return Err(Error::InvalidConfig("shape grid missing for some interval".into()));
        }
        let scale = 1.0 / n.max(1) as f64;
        for (iv, pts) in p.intervals().iter().zip(&grids.shape) {
            for &u in pts {
                let mut row = derivative_row(n, u);
                row.iter_mut().for_each(|v| *v *= -iv.sign * scale);
                row.push(0.0);
                rows.push((row, 0.0));
            }
        }
    }
    let constraints = (0..nv)
        .map(|v| {
            let coeffs = rows.iter().map(|(r, _)| r[v]).collect();
            let rhs = if v + 1 == nv { -1.0 } else { 0.0 };
            Constraint::new(coeffs, RowRelation::Eq, rhs)
        })
        .collect();
    let dual = LinearProgram {
        objective: rows.iter().map(|(_, b)| *b).collect(),
        constraints,
        bounds: vec![VarBound::NON_NEGATIVE; rows.len()],
    };
    let sol = lp_solve(&dual, &LpOptions::default())?;
    match sol.status {
        LpStatus::Optimal => {}
        // an unbounded dual means an infeasible primal and vice versa
        LpStatus::Unbounded => return Err(Error::Lp("minimax program is infeasible".into())),
        LpStatus::Infeasible => return Err(Error::Lp("minimax program is unbounded".into())),
        LpStatus::IterationLimit => return Err(Error::Lp("minimax program hit the pivot limit".into())),
    }
    let poly = TrigPoly::from_vec(n, &sol.duals[..nv - 1]);
    // the dual optimum is minus the primal one
    let lp_objective = eps0 - sol.objective_value;
    let epsilon = grids
        .error
        .iter()
        .zip(&values)
        .fold(0.0f64, |m, (&x, &fx)| m.max((fx - poly.eval(x)).abs()));
    let true_error_estimate = grids.fine_error.iter().fold(epsilon, |m, &x| m.max((f(x) - poly.eval(x)).abs()));
    let shape_violation = match pattern {
        Some(p) => {
            let d = poly.derivative();
            p.intervals()
                .iter()
                .zip(&grids.fine_shape)
                .flat_map(|(iv, pts)| pts.iter().map(move |&u| (iv.sign, u)))
                .fold(0.0f64, |m, (sign, u)| m.max(-sign * d.eval(u)))
        }
        None => 0.0,
    };
    Ok(ApproxResult {
        poly,
        epsilon,
        lp_objective,
        true_error_estimate,
        shape_violation,
        status: sol.status,
        pivots: sol.pivots,
    })
}

/// Grid minimax approximation of degree `n` without shape constraints.
pub fn best_unconstrained<F: Fn(f64) -> f64>(f: F, n: usize, grids: &ApproxGrids) -> Result<ApproxResult> {
    solve_minimax(f, n, None, grids)
}

/// Grid minimax approximation of degree `n` with `sigma_i tau' >= 0` on
/// the shape grid of every interval.
pub fn best_comonotone<F: Fn(f64) -> f64>(
    f: F,
    n: usize,
    pattern: &MonotonicityPattern,
    grids: &ApproxGrids,
) -> Result<ApproxResult> {
    solve_minimax(f, n, Some(pattern), grids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::normalize_nodes;

    fn flagship() -> MonotonicityPattern {
        MonotonicityPattern::from_nodes(&normalize_nodes(&[0.0, -PI]).unwrap())
    }

    #[test]
    fn pattern_validation() {
        let p = flagship();
        assert_eq!(p.intervals().len(), 2);
        assert_eq!(p.intervals()[0].sign, 1.0);
        assert!(MonotonicityPattern::new(p.intervals().to_vec()).is_ok());
        let mut bad = p.intervals().to_vec();
        bad[1].sign = 1.0;
        assert!(MonotonicityPattern::new(bad).is_err());
        let mut gap = p.intervals().to_vec();
        gap[1].left += 0.1;
        assert!(MonotonicityPattern::new(gap).is_err());
    }

    #[test]
    fn polynomial_targets_are_reproduced() {
        let p = TrigPoly::new(0.3, vec![1.0, -0.5, 0.25], vec![0.0, 0.7, -0.1]).unwrap();
        let grids = ApproxGrids::standard(3, None, 8).unwrap();
        let r = best_unconstrained(|x| p.eval(x), 3, &grids).unwrap();
        assert!(r.epsilon <= 1e-9);
        assert!(r.lp_objective.abs() <= 1e-9);
        assert!(r.true_error_estimate <= 1e-9);
    }

    #[test]
    fn next_harmonic_has_unit_error() {
        let n = 4;
        let grids = ApproxGrids::standard(n, None, 8).unwrap();
        let r = best_unconstrained(|x| (5.0 * x).cos(), n, &grids).unwrap();
        assert!((r.epsilon - 1.0).abs() < 1e-9);
        assert!((r.lp_objective - r.epsilon).abs() < 1e-9);
        let shift = TrigPoly::new(0.1, vec![0.2, 0.0, -0.3, 0.4], vec![0.5, 0.0, 0.0, 0.1]).unwrap();
        let s = best_unconstrained(|x| (5.0 * x).cos() + shift.eval(x), n, &grids).unwrap();
        assert!((s.epsilon - r.epsilon).abs() < 1e-9);
    }

    #[test]
    fn comonotone_target_is_feasible_and_exact() {
        let p = flagship();
        for n in 1..=4 {
            let grids = ApproxGrids::standard(n, Some(&p), 8).unwrap();
            let r = best_comonotone(|x: f64| -x.cos(), n, &p, &grids).unwrap();
            assert!(r.epsilon <= 1e-9, "n={n} eps={}", r.epsilon);
            assert!(r.shape_violation <= 1e-9);
        }
    }

    #[test]
    fn constraints_never_help() {
        let p = flagship();
        let f = |x: f64| (x + 0.3).sin().powi(3) + 0.2 * (3.0 * x).cos();
        let n = 3;
        let grids = ApproxGrids::standard(n, Some(&p), 8).unwrap();
        let free = best_unconstrained(f, n, &grids).unwrap();
        let shaped = best_comonotone(f, n, &p, &grids).unwrap();
        assert!(shaped.epsilon >= free.epsilon - 1e-12);
        assert!(free.epsilon <= free.true_error_estimate + 1e-12);
    }

    #[test]
    fn grid_size_is_checked() {
        assert!(matches!(ApproxGrids::standard(10, None, 3), Err(Error::GridTooSmall { .. })));
    }
}
