use std::f64::consts::PI;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use super::balance::{integrate_pieces, solve_alpha, solve_gamma, AlphaSolution, BaseIntegrand, GammaSolution};
use super::constants::ConstructionConstants;
use super::nodes::NodeSet;
use super::trough::{TroughShape, TroughSide, TroughSpec};
use crate::error::{Error, Result};
use crate::numerics::{wrap_to_period, DEFAULT_TOL, TWO_PI};
use crate::trig::{project_from_samples, projection_points, Projection, TrigPoly};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    pub shape: TroughShape,
    /// Total absolute tolerance for each cumulative table.
    pub tol: f64,
    /// Table panel count; defaults to `max(4096, 16 (2N + s))`.
    pub table_points: Option<usize>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { shape: TroughShape::PiecewiseLinear, tol: DEFAULT_TOL, table_points: None }
    }
}

/// Antiderivative samples on `x_j = -pi + j h`, `j = 0..=m`, anchored at 0,
/// interpolated by cubic Hermite with the exact integrand as slope.
#[derive(Debug, Clone)]
pub struct CumulativeTable {
    h: f64,
    values: Vec<f64>,
}

impl CumulativeTable {
    fn build<F: Fn(f64) -> f64 + Sync>(f: &F, panels: usize, tol: f64, breaks: &[f64]) -> Result<Self> {
        assert!(panels.is_multiple_of(2));
        let h = TWO_PI / panels as f64;
        let node = |j: usize| -PI + h * j as f64;
        let panel_tol = tol / panels as f64;
        let pieces: Vec<f64> = (0..panels)
            .into_par_iter()
            .map(|j| {
                let (a, b) = (node(j), if j + 1 == panels { PI } else { node(j + 1) });
                let cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
                let mut edges = vec![a];
                edges.extend(cuts);
                edges.push(b);
                let share = panel_tol / (edges.len() - 1) as f64;
                edges
                    .windows(2)
                    .map(|w| crate::numerics::adaptive_simpson(f, w[0], w[1], share).map(|(v, _)| v))
                    .sum::<Result<f64>>()
            })
            .collect::<Result<_>>()?;
        let mid = panels / 2;
        let mut values = vec![0.0; panels + 1];
        for j in mid..panels {
            values[j + 1] = values[j] + pieces[j];
        }
        for j in (0..mid).rev() {
            values[j] = values[j + 1] - pieces[j];
        }
        Ok(Self { h, values })
    }

    pub fn panels(&self) -> usize {
        self.values.len() - 1
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Integral over one full period.
    pub fn period_integral(&self) -> f64 {
        self.values[self.panels()] - self.values[0]
    }

    pub fn node_values(&self) -> &[f64] {
        &self.values
    }

    fn eval_in_period<D: Fn(f64) -> f64>(&self, x: f64, deriv: &D) -> f64 {
        let pos = ((x + PI) / self.h).clamp(0.0, self.panels() as f64);
        let j = (pos.floor() as usize).min(self.panels() - 1);
        let x0 = -PI + self.h * j as f64;
        let x1 = -PI + self.h * (j + 1) as f64;
        let t = (x - x0) / self.h;
        if t == 0.0 {
            return self.values[j];
        }
        let (v0, v1) = (self.values[j], self.values[j + 1]);
        let (d0, d1) = (deriv(x0) * self.h, deriv(x1) * self.h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * v0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * v1 + (t3 - t2) * d1
    }

    /// Periodic continuation: whole periods add [`Self::period_integral`].
    pub fn eval<D: Fn(f64) -> f64>(&self, x: f64, deriv: &D) -> f64 {
        if (-PI..=PI).contains(&x) {
            return self.eval_in_period(x, deriv);
        }
        let w = wrap_to_period(x);
        let periods = ((x - w) / TWO_PI).round();
        self.eval_in_period(w, deriv) + periods * self.period_integral()
    }
}

/// Whether the conditions on `N_0` hold at the requested degree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainFlags {
    /// `n > s + 2N - 1`
    pub degree_ok: bool,
    /// `b_n < 1 / (2 M_bar N)`
    pub b_small_ok: bool,
    /// `M_bar^4 M_tilde b_n^2 n^2 / (8 m_*) < 1/2`
    pub parenthesis_ok: bool,
}

impl ChainFlags {
    pub fn all(&self) -> bool {
        self.degree_ok && self.b_small_ok && self.parenthesis_ok
    }
}

/// `g_b` and `Q_b` with their balance coefficients and cached tables.
#[derive(Debug)]
pub struct CounterexampleFunction {
    nodes: NodeSet,
    constants: ConstructionConstants,
    k: usize,
    n: usize,
    b_raw: f64,
    b: f64,
    clamped: bool,
    alpha: AlphaSolution,
    gamma: GammaSolution,
    trough: TroughSpec,
    base: BaseIntegrand,
    g_table: CumulativeTable,
    q_table: CumulativeTable,
    chain: ChainFlags,
    q_prime_poly: OnceLock<Result<Projection>>,
}

/// `b_n = n^{-k/3}`.
pub fn b_for_degree(n: usize, k: usize) -> f64 {
    (n as f64).powf(-(k as f64) / 3.0)
}

pub fn build_counterexample(
    nodes: &NodeSet,
    constants: &ConstructionConstants,
    k: usize,
    n: usize,
    options: &BuildOptions,
) -> Result<CounterexampleFunction> {
    if k <= 3 {
        return Err(Error::InvalidConfig(format!("smoothness order k must exceed 3, got {k}")));
    }
    if n == 0 {
        return Err(Error::InvalidConfig("degree n must be positive".into()));
    }
    let b_raw = b_for_degree(n, k);
    let cap = 0.999 * constants.b_max;
    let (b, clamped) = if b_raw >= cap { (cap, true) } else { (b_raw, false) };
    build_with_b(nodes, constants, k, n, b_raw, b, clamped, options)
}

/// Same as [`build_counterexample`] with an explicit `b` in `(0, b_max)`.
pub fn build_counterexample_with_b(
    nodes: &NodeSet,
    constants: &ConstructionConstants,
    k: usize,
    n: usize,
    b: f64,
    options: &BuildOptions,
) -> Result<CounterexampleFunction> {
    if !(b > 0.0 && b < constants.b_max) {
        return Err(Error::InvalidConfig(format!("b = {b} outside (0, {})", constants.b_max)));
    }
    build_with_b(nodes, constants, k, n, b, b, false, options)
}

#[allow(clippy::too_many_arguments)]
fn build_with_b(
    nodes: &NodeSet,
    constants: &ConstructionConstants,
    k: usize,
    n: usize,
    b_raw: f64,
    b: f64,
    clamped: bool,
    options: &BuildOptions,
) -> Result<CounterexampleFunction> {
    let alpha = solve_alpha(nodes, constants, b)?;
    let gamma = solve_gamma(nodes, constants, b, alpha.alpha, options.shape)?;
    let trough = TroughSpec::new(TroughSide::Combined { gamma: gamma.gamma }, b, constants.m_bar, options.shape);
    let base = BaseIntegrand::new(nodes, constants, b);

    let min_panels = 4096.max(16 * (2 * constants.kernel_n + nodes.s()));
    let panels = options.table_points.unwrap_or(min_panels).max(4);
    let panels = panels + panels % 2;

    let a = alpha.alpha;
    let big_m = constants.big_m;
    let q_prime = |t: f64| base.shape(t) / big_m * base.weight(a, t) / PI;
    let g_prime = |t: f64| {
        let kb = trough.eval(t);
        if kb == 0.0 {
            0.0
        } else {
            kb * q_prime(t)
        }
    };
    let breaks = trough.breakpoints();
    let g_table = CumulativeTable::build(&g_prime, panels, options.tol, &breaks)?;
    let q_table = CumulativeTable::build(&q_prime, panels, options.tol, &[])?;

    let nf = n as f64;
    let chain = ChainFlags {
        degree_ok: n > nodes.s() + 2 * constants.kernel_n - 1,
        b_small_ok: b < 1.0 / (2.0 * constants.m_bar * constants.kernel_n as f64),
        parenthesis_ok: constants.m_bar.powi(4) * constants.m_tilde_big * b * b * nf * nf
            / (8.0 * constants.m_star)
            < 0.5,
    };

    Ok(CounterexampleFunction {
        nodes: nodes.clone(),
        constants: constants.clone(),
        k,
        n,
        b_raw,
        b,
        clamped,
        alpha,
        gamma,
        trough,
        base,
        g_table,
        q_table,
        chain,
        q_prime_poly: OnceLock::new(),
    })
}

impl CounterexampleFunction {
    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    pub fn constants(&self) -> &ConstructionConstants {
        &self.constants
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `b` in use, after clamping.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// `n^{-k/3}` before clamping.
    pub fn b_raw(&self) -> f64 {
        self.b_raw
    }

    pub fn clamped(&self) -> bool {
        self.clamped
    }

    pub fn alpha(&self) -> &AlphaSolution {
        &self.alpha
    }

    pub fn gamma(&self) -> &GammaSolution {
        &self.gamma
    }

    pub fn trough(&self) -> &TroughSpec {
        &self.trough
    }

    pub fn chain_flags(&self) -> ChainFlags {
        self.chain
    }

    pub fn g_table(&self) -> &CumulativeTable {
        &self.g_table
    }

    pub fn q_table(&self) -> &CumulativeTable {
        &self.q_table
    }

    /// `q_b(x) = sin((x - b)/2) sin((x + b)/2) sin(x/2)`.
    pub fn q_small(&self, x: f64) -> f64 {
        (0.5 * (x - self.b)).sin() * (0.5 * (x + self.b)).sin() * (0.5 * x).sin()
    }

    /// `alpha J_N(x - d*) + (1 - alpha) J_N(x + d*)`.
    pub fn weight(&self, x: f64) -> f64 {
        self.base.weight(self.alpha.alpha, x)
    }

    pub fn eval_q_prime(&self, x: f64) -> f64 {
        self.base.shape(x) / self.constants.big_m * self.weight(x) / PI
    }

    pub fn eval_g_prime(&self, x: f64) -> f64 {
        let kb = self.trough.eval(x);
        if kb == 0.0 {
            0.0
        } else {
            kb * self.eval_q_prime(x)
        }
    }

    pub fn eval_g(&self, x: f64) -> f64 {
        self.g_table.eval(x, &|t| self.eval_g_prime(t))
    }

    pub fn eval_q(&self, x: f64) -> f64 {
        self.q_table.eval(x, &|t| self.eval_q_prime(t))
    }

    /// `g(x) - Q(x) = int_0^x (K_b - 1) Q'`, integrated directly; it is
    /// constant outside `|x| <= M_bar b`.
    pub fn eval_g_minus_q(&self, x: f64) -> Result<f64> {
        let wide = self.constants.m_bar * self.b;
        let x = wrap_to_period(x).clamp(-wide, wide);
        let f = |t: f64| -self.trough.deficit(t) * self.eval_q_prime(t);
        let breaks = self.trough.breakpoints();
        if x >= 0.0 {
            integrate_pieces(&f, 0.0, x, &breaks, 1e-12)
        } else {
            integrate_pieces(&f, x, 0.0, &breaks, 1e-12).map(|v| -v)
        }
    }

    /// `Q_b''(0) = -(1/2) sin^2(b/2) (Pi_*(0)/M) (1/pi) J_N(d*)`.
    pub fn q_second_at_zero(&self) -> f64 {
        let c = &self.constants;
        -0.5 * (0.5 * self.b).sin().powi(2) * c.pi_star_at_zero / c.big_m * c.kernel().eval(c.d_star) / PI
    }

    /// Degree of `Q_b` as a trigonometric polynomial.
    pub fn q_degree(&self) -> usize {
        self.constants.q_degree()
    }

    /// Coefficient form of `Q_b'` with its projection residual.
    pub fn q_prime_poly(&self) -> Result<&Projection> {
        self.q_prime_poly
            .get_or_init(|| {
                let n = self.q_degree();
                project_from_samples(|x| self.eval_q_prime(x), n, projection_points(n))
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Coefficient form of `Q_b`, anchored at `Q_b(0) = 0`.
    pub fn q_poly(&self) -> Result<TrigPoly> {
        let (q, _mean) = self.q_prime_poly()?.poly.antiderivative();
        Ok(q)
    }
}
