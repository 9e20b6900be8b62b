//! Oracles and generators shared by the integration tests.

#![allow(dead_code)]

use comono_lab::shapeapprox::{Constraint, LinearProgram, RowRelation, VarBound};
use comono_lab::trig::TrigPoly;
use rand::Rng;

/// Random polynomial of the given degree with coefficients in `[-1, 1]`.
pub fn random_trig_poly<R: Rng>(rng: &mut R, n: usize) -> TrigPoly {
    let a0 = rng.gen_range(-1.0..1.0);
    let a = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let b = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    TrigPoly::new(a0, a, b).unwrap()
}

/// Feasible, bounded LP with `vars` variables. Boxes reach the solver three
/// ways: as variable bounds, as a lower bound plus an explicit row, or as two
/// explicit rows on a free variable.
pub fn random_bounded_lp<R: Rng>(rng: &mut R, vars: usize) -> LinearProgram {
    let mut bounds = Vec::with_capacity(vars);
    let mut constraints = Vec::new();
    let mut interior = Vec::with_capacity(vars);
    for i in 0..vars {
        let unit = |v: f64| {
            let mut c = vec![0.0; vars];
            c[i] = v;
            c
        };
        match rng.gen_range(0..3) {
            0 => {
                let lo = rng.gen_range(-2.0..0.0);
                let hi = lo + rng.gen_range(1.0..3.0);
                bounds.push(VarBound::new(lo, hi));
                interior.push(lo + rng.gen_range(0.2..0.8) * (hi - lo));
            }
            1 => {
                let hi = rng.gen_range(1.0..3.0);
                bounds.push(VarBound::NON_NEGATIVE);
                constraints.push(Constraint::new(unit(1.0), RowRelation::Le, hi));
                interior.push(rng.gen_range(0.2..0.8) * hi);
            }
            _ => {
                let lo = rng.gen_range(-2.0..0.0);
                let hi = lo + rng.gen_range(1.0..3.0);
                bounds.push(VarBound::FREE);
                constraints.push(Constraint::new(unit(1.0), RowRelation::Ge, lo));
                constraints.push(Constraint::new(unit(-1.0), RowRelation::Ge, -hi));
                interior.push(lo + rng.gen_range(0.2..0.8) * (hi - lo));
            }
        }
    }
    let rows = rng.gen_range(1..=6);
    let mut has_eq = false;
    for _ in 0..rows {
        let a: Vec<f64> = (0..vars).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let at: f64 = a.iter().zip(&interior).map(|(p, q)| p * q).sum();
        let pick = rng.gen_range(0..10);
        let c = if pick == 0 && !has_eq {
            has_eq = true;
            Constraint::new(a, RowRelation::Eq, at)
        } else if pick < 6 {
            Constraint::new(a, RowRelation::Le, at + rng.gen_range(0.0..1.0))
        } else {
            Constraint::new(a, RowRelation::Ge, at - rng.gen_range(0.0..1.0))
        };
        constraints.push(c);
    }
    let objective = (0..vars).map(|_| rng.gen_range(-5.0..5.0)).collect();
    LinearProgram { objective, constraints, bounds }
}

fn solve_square(mut a: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        rhs.swap(col, piv);
        let (top, rest) = a.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for (r, row) in rest.iter_mut().enumerate() {
            let f = row[col] / pivot_row[col];
            for (v, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *v -= f * p;
            }
            rhs[col + 1 + r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (rhs[r] - s) / a[r][r];
    }
    Some(x)
}

fn feasible(lp: &LinearProgram, x: &[f64], tol: f64) -> bool {
    let bounds_ok = lp.bounds.iter().zip(x).all(|(b, &v)| v >= b.lower - tol && v <= b.upper + tol);
    bounds_ok
        && lp.constraints.iter().all(|c| {
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(p, q)| p * q).sum();
            match c.relation {
                RowRelation::Le => lhs <= c.rhs + tol,
                RowRelation::Ge => lhs >= c.rhs - tol,
                RowRelation::Eq => (lhs - c.rhs).abs() <= tol,
            }
        })
}

/// Minimum of a bounded LP by visiting every basic solution: each choice of
/// `n` linearly independent active hyperplanes (rows and finite bounds) that
/// contains every equality row. `None` when no vertex is feasible.
pub fn vertex_enumeration_min(lp: &LinearProgram) -> Option<f64> {
    let n = lp.objective.len();
    let mut planes: Vec<(Vec<f64>, f64, bool)> =
        lp.constraints.iter().map(|c| (c.coeffs.clone(), c.rhs, c.relation == RowRelation::Eq)).collect();
    for (i, b) in lp.bounds.iter().enumerate() {
        for v in [b.lower, b.upper] {
            if v.is_finite() {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                planes.push((e, v, false));
            }
        }
    }
    let required: Vec<usize> = (0..planes.len()).filter(|&i| planes[i].2).collect();
    let optional: Vec<usize> = (0..planes.len()).filter(|&i| !planes[i].2).collect();
    if required.len() > n {
        return None;
    }
    let mut best: Option<f64> = None;
    let mut chosen = Vec::with_capacity(n);
    fn walk(
        start: usize,
        need: usize,
        optional: &[usize],
        chosen: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if need == 0 {
            visit(chosen);
            return;
        }
        for i in start..optional.len() {
            if optional.len() - i < need {
                break;
            }
            chosen.push(optional[i]);
            walk(i + 1, need - 1, optional, chosen, visit);
            chosen.pop();
        }
    }
    let mut visit = |picked: &[usize]| {
        let idx: Vec<usize> = required.iter().chain(picked).copied().collect();
        let a = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let rhs = idx.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = solve_square(a, rhs) {
            if feasible(lp, &x, 1e-9) {
                let obj: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
    };
    walk(0, n - required.len(), &optional, &mut chosen, &mut visit);
    best
}
