//! The ratio experiment: comonotone approximation error of `g_{b_n}`
//! against its modulus of smoothness, row by row in `n`.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::approx::{best_comonotone, ApproxGrids, ApproxResult, MonotonicityPattern};
use crate::construction::{build_counterexample, BuildOptions, ConstructionConstants, CounterexampleFunction, NodeSet};
use crate::error::{Error, Result};
use crate::smoothness::{modulus, ModulusQuery};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioOptions {
    pub build: BuildOptions,
    /// Grid multiplier for the LP grids, `mult (n + 1)` points each.
    pub grid_mult: usize,
    pub modulus_x_points: usize,
    pub modulus_h_points: usize,
}

impl Default for RatioOptions {
    fn default() -> Self {
        Self { build: BuildOptions::default(), grid_mult: 8, modulus_x_points: 2048, modulus_h_points: 128 }
    }
}

/// Every quantity entering the lower-bound chain for one row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundTerms {
    /// `m_* b^2 / n^2`
    pub m_star_b2_over_n2: f64,
    /// `1 - M_bar^4 M_tilde b^2 n^2 / (8 m_*)`
    pub parenthesis: f64,
    /// Product of the two terms above.
    pub chain_lower_bound: f64,
    /// `||tau_n - g||` on the fine grid.
    pub tau_minus_g: f64,
    /// `tau_n''(0)`
    pub tau_second_at_zero: f64,
    /// `tau_n''(0) >= -1e-6 n^2 ||tau_n||`
    pub tau_second_ok: bool,
    /// `Q''(0)`, analytic.
    pub q_second_at_zero: f64,
    /// Degree of `R_n = tau_n - Q`.
    pub r_degree: usize,
    /// `|R_n''(0)|`
    pub r_second_at_zero: f64,
    /// `||R_n||`
    pub r_norm: f64,
    /// `m_* b^2 - max(0, -tau_n''(0))`
    pub bernstein_lower: f64,
    /// `deg(R_n)^2 ||R_n|| (1 + 1e-6)`
    pub bernstein_upper: f64,
    pub bernstein_ok: bool,
    /// `2^(k-3) M_bar^3 M_tilde b^3 + n^(-k) M_k`
    pub modulus_bound: f64,
    pub m_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRow {
    pub n: usize,
    /// Value of `b` used in the construction.
    pub b_n: f64,
    /// `n^(-k/3)` before clamping below `b_max`.
    pub b_n_raw: f64,
    pub clamped: bool,
    pub alpha: f64,
    pub gamma: f64,
    /// Grid-relaxed comonotone minimax error, a lower estimate of the true one.
    pub e_lower: f64,
    pub true_error_estimate: f64,
    pub shape_violation: f64,
    pub omega_k: f64,
    /// `n E_lower / omega_k(g'; 1/n)`
    pub ratio: f64,
    /// Whether the parenthesis is positive, so the chain says something.
    pub chain_applicable: bool,
    pub chain_ok: bool,
    /// Set when `n <= s + 2N - 1`, outside the range the argument covers.
    pub degree_warning: bool,
    pub bound_terms: BoundTerms,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowOutcome {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row: Option<RatioRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioTable {
    pub k: usize,
    pub rows: Vec<RowOutcome>,
}

pub const CSV_HEADER: [&str; 9] = ["n", "b_n", "clamped", "alpha", "gamma", "E_lower", "omega_k", "ratio", "chain_ok"];

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

impl RatioTable {
    pub fn computed(&self) -> impl Iterator<Item = &RatioRow> {
        self.rows.iter().filter_map(|r| r.row.as_ref())
    }

    pub fn all_computed(&self) -> bool {
        self.rows.iter().all(|r| r.row.is_some())
    }

    /// Whether each ratio is at least `(1 - tol)` times the previous one.
    pub fn ratio_non_decreasing(&self, tol: f64) -> bool {
        let ratios: Vec<f64> = self.computed().map(|r| r.ratio).collect();
        ratios.windows(2).all(|w| w[1] >= (1.0 - tol) * w[0])
    }

    /// Computed rows only, 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidConfig(format!("csv output failed: {e}"));
        w.write_record(CSV_HEADER).map_err(io)?;
        for r in self.computed() {
            w.write_record([
                r.n.to_string(),
                sci(r.b_n),
                r.clamped.to_string(),
                sci(r.alpha),
                sci(r.gamma),
                sci(r.e_lower),
                sci(r.omega_k),
                sci(r.ratio),
                r.chain_ok.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidConfig(format!("csv output failed: {e}")))?;
        Ok(())
    }
}

fn bound_terms(cf: &CounterexampleFunction, fit: &ApproxResult) -> Result<BoundTerms> {
    let c = cf.constants();
    let (b, n, k) = (cf.b(), cf.n(), cf.k());
    let nf = n as f64;
    let m_star_b2_over_n2 = c.m_star * b * b / (nf * nf);
    let parenthesis = 1.0 - c.m_bar.powi(4) * c.m_tilde_big * b * b * nf * nf / (8.0 * c.m_star);

    let tau = &fit.poly;
    let tau_second_at_zero = tau.nth_derivative(2).eval(0.0);
    let tau_second_ok = tau_second_at_zero >= -1e-6 * nf * nf * tau.sup_norm();

    let q = cf.q_poly()?;
    let r_degree = n.max(q.degree());
    let r = tau.resized(r_degree).sub(&q.resized(r_degree));
    let r_second_at_zero = r.nth_derivative(2).eval(0.0).abs();
    let r_norm = r.sup_norm();
    let bernstein_lower = c.m_star * b * b - (-tau_second_at_zero).max(0.0);
    let bernstein_upper = (r_degree * r_degree) as f64 * r_norm * (1.0 + 1e-6);

    let m_k = cf.q_prime_poly()?.poly.nth_derivative(k).sup_norm();
    let modulus_bound = 2f64.powi(k as i32 - 3) * c.m_bar.powi(3) * c.m_tilde_big * b.powi(3) + nf.powi(-(k as i32)) * m_k;

    Ok(BoundTerms {
        m_star_b2_over_n2,
        parenthesis,
        chain_lower_bound: m_star_b2_over_n2 * parenthesis,
        tau_minus_g: fit.true_error_estimate,
        tau_second_at_zero,
        tau_second_ok,
        q_second_at_zero: cf.q_second_at_zero(),
        r_degree,
        r_second_at_zero,
        r_norm,
        bernstein_lower,
        bernstein_upper,
        bernstein_ok: bernstein_lower <= r_second_at_zero && r_second_at_zero <= bernstein_upper,
        modulus_bound,
        m_k,
    })
}

/// One row of the experiment.
pub fn ratio_row(
    nodes: &NodeSet,
    constants: &ConstructionConstants,
    k: usize,
    n: usize,
    options: &RatioOptions,
) -> Result<RatioRow> {
    let cf = build_counterexample(nodes, constants, k, n, &options.build)?;
    let pattern = MonotonicityPattern::from_nodes(nodes);
    let grids = ApproxGrids::standard(n, Some(&pattern), options.grid_mult)?;
    let fit = best_comonotone(|x| cf.eval_g(x), n, &pattern, &grids)?;
    let query = ModulusQuery::new(k, 1.0 / n as f64).with_grid(options.modulus_x_points, options.modulus_h_points);
    let omega_k = modulus(&|x| cf.eval_g_prime(x), &query);
    let terms = bound_terms(&cf, &fit)?;
    let chain_applicable = terms.parenthesis > 0.0;
    let chain_ok = !chain_applicable || terms.tau_minus_g >= terms.chain_lower_bound;
    Ok(RatioRow {
        n,
        b_n: cf.b(),
        b_n_raw: cf.b_raw(),
        clamped: cf.clamped(),
        alpha: cf.alpha().alpha,
        gamma: cf.gamma().gamma,
        e_lower: fit.epsilon,
        true_error_estimate: fit.true_error_estimate,
        shape_violation: fit.shape_violation,
        omega_k,
        ratio: n as f64 * fit.epsilon / omega_k,
        chain_applicable,
        chain_ok,
        degree_warning: !cf.chain_flags().degree_ok,
        bound_terms: terms,
    })
}

/// Rows are computed concurrently; a failing row records its error and
/// leaves the others untouched.
pub fn ratio_experiment(
    nodes: &NodeSet,
    constants: &ConstructionConstants,
    k: usize,
    n_list: &[usize],
    options: &RatioOptions,
) -> Result<RatioTable> {
    if n_list.is_empty() {
        return Err(Error::InvalidConfig("empty degree list".into()));
    }
    if k <= 3 {
        return Err(Error::InvalidConfig(format!("smoothness order k must exceed 3, got {k}")));
    }
    let rows = n_list
        .par_iter()
        .map(|&n| match ratio_row(nodes, constants, k, n, options) {
            Ok(row) => RowOutcome { n, row: Some(row), error: None },
            Err(e) => RowOutcome { n, row: None, error: Some(e.to_string()) },
        })
        .collect();
    Ok(RatioTable { k, rows })
}
