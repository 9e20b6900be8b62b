//! The two balance coefficients: `alpha` makes `Q` periodic, `gamma` makes `g` periodic.

use std::f64::consts::PI;

use serde::Serialize;

use super::constants::ConstructionConstants;
use super::nodes::NodeSet;
use super::trough::{TroughShape, TroughSide, TroughSpec};
use crate::error::{Error, Result};
use crate::jackson::JacksonKernel;
use crate::numerics::{adaptive_simpson, default_point_count, periodic_integral};
use crate::trig::SineProduct;

/// `sin((t - b)/2) sin((t + b)/2) Pi(t)` with the kernel pair around `+-d*`.
#[derive(Debug, Clone)]
pub(crate) struct BaseIntegrand {
    pi: SineProduct,
    b: f64,
    kernel: JacksonKernel,
    d_star: f64,
}

impl BaseIntegrand {
    pub(crate) fn new(nodes: &NodeSet, constants: &ConstructionConstants, b: f64) -> Self {
        Self { pi: nodes.pi_product(), b, kernel: constants.kernel(), d_star: constants.d_star }
    }

    /// `sin((t - b)/2) sin((t + b)/2) Pi(t)`, which equals `q_b(t) Pi_*(t)`.
    pub(crate) fn shape(&self, t: f64) -> f64 {
        (0.5 * (t - self.b)).sin() * (0.5 * (t + self.b)).sin() * self.pi.eval(t)
    }

    pub(crate) fn right_kernel(&self, t: f64) -> f64 {
        self.kernel.eval(t - self.d_star)
    }

    pub(crate) fn left_kernel(&self, t: f64) -> f64 {
        self.kernel.eval(t + self.d_star)
    }

    pub(crate) fn weight(&self, alpha: f64, t: f64) -> f64 {
        alpha * self.right_kernel(t) + (1.0 - alpha) * self.left_kernel(t)
    }

    pub(crate) fn quadrature_points(&self) -> usize {
        default_point_count(self.kernel.parameter(), self.pi.factor_count() / 2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaSolution {
    pub alpha: f64,
    /// `Q_r(2 pi)`
    pub q_right: f64,
    /// `Q_l(2 pi)`
    pub q_left: f64,
    /// `|Q(2 pi)|` recomputed by quadrature with the combined weight.
    pub residual: f64,
    /// `|Q_r| + |Q_l|`
    pub scale: f64,
}

/// Solves `alpha Q_r(2 pi) + (1 - alpha) Q_l(2 pi) = 0`.
pub fn solve_alpha(nodes: &NodeSet, constants: &ConstructionConstants, b: f64) -> Result<AlphaSolution> {
    let f = BaseIntegrand::new(nodes, constants, b);
    let m = f.quadrature_points();
    let q_right = periodic_integral(|t| f.shape(t) * f.right_kernel(t), m)? / PI;
    let q_left = periodic_integral(|t| f.shape(t) * f.left_kernel(t), m)? / PI;
    if !(q_right > 0.0 && q_left < 0.0) {
        return Err(Error::AlphaSign { q_right, q_left });
    }
    let alpha = -q_left / (q_right - q_left);
    let residual = (periodic_integral(|t| f.shape(t) * f.weight(alpha, t), m)? / PI).abs();
    Ok(AlphaSolution { alpha, q_right, q_left, residual, scale: q_right.abs() + q_left.abs() })
}

/// `int_a^b f` split at interior breakpoints, with a tolerance relative to
/// the integrand's magnitude on the window.
pub(crate) fn integrate_pieces<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, breaks: &[f64], rel_tol: f64) -> Result<f64> {
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let probe = (0..=16)
            .map(|j| f(lo + (hi - lo) * j as f64 / 16.0).abs())
            .fold(0.0, f64::max);
        let tol = (rel_tol * probe * (hi - lo)).max(f64::MIN_POSITIVE);
        total += adaptive_simpson(f, lo, hi, tol)?.0;
    }
    Ok(total)
}

/// `(1/pi) int K(t) F(t) W(t) dt` over one period. With `alpha` balanced
/// the full-period integral of `F W` vanishes, so only the window where the
/// trough is below 1 contributes: the result is minus the deficit integral.
/// Evaluating the vanishing part would add its rounding residue, which at
/// small `b` exceeds the window contribution.
pub(crate) fn trough_weighted_integral(f: &BaseIntegrand, alpha: f64, trough: &TroughSpec) -> Result<f64> {
    let (lo, hi) = trough.transition_window();
    let deficit = integrate_pieces(
        &|t| trough.deficit(t) * f.shape(t) * f.weight(alpha, t),
        lo,
        hi,
        &trough.breakpoints(),
        1e-13,
    )?;
    Ok(-deficit / PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaSolution {
    pub gamma: f64,
    /// With the right trough; positive.
    pub i_right: f64,
    /// With the left trough; negative.
    pub i_left: f64,
    /// `|(1/pi) int K_b F W|`, recomputed with the combined trough.
    pub residual: f64,
    pub scale: f64,
}

/// Solves `gamma I_1 + (1 - gamma) I_2 = 0`.
pub fn solve_gamma(
    nodes: &NodeSet,
    constants: &ConstructionConstants,
    b: f64,
    alpha: f64,
    shape: TroughShape,
) -> Result<GammaSolution> {
    let f = BaseIntegrand::new(nodes, constants, b);
    let right = TroughSpec::new(TroughSide::Right, b, constants.m_bar, shape);
    let left = TroughSpec::new(TroughSide::Left, b, constants.m_bar, shape);
    let i_right = trough_weighted_integral(&f, alpha, &right)?;
    let i_left = trough_weighted_integral(&f, alpha, &left)?;
    if !(i_right > 0.0 && i_left < 0.0) {
        return Err(Error::GammaSign { i_right, i_left });
    }
    let gamma = -i_left / (i_right - i_left);
    let combined = TroughSpec::new(TroughSide::Combined { gamma }, b, constants.m_bar, shape);
    let residual = trough_weighted_integral(&f, alpha, &combined)?.abs();
    Ok(GammaSolution { gamma, i_right, i_left, residual, scale: i_right.abs() + i_left.abs() })
}
