//! Real trigonometric polynomials `a0 + sum (a_k cos kx + b_k sin kx)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{sup_norm, PeriodicGrid, TWO_PI};

/// Harmonics are advanced by rotation; every `RESEED` steps the angle is
/// recomputed directly so the drift stays at a few ulps.
const RESEED: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TrigPolyRepr", into = "TrigPolyRepr")]
pub struct TrigPoly {
    a0: f64,
    a: Vec<f64>,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TrigPolyRepr {
    n: usize,
    a0: f64,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl From<TrigPoly> for TrigPolyRepr {
    fn from(p: TrigPoly) -> Self {
        Self { n: p.degree(), a0: p.a0, a: p.a, b: p.b }
    }
}

impl TryFrom<TrigPolyRepr> for TrigPoly {
    type Error = String;

    fn try_from(r: TrigPolyRepr) -> std::result::Result<Self, String> {
        if r.a.len() != r.n || r.b.len() != r.n {
            return Err(format!(
                "coefficient arrays must have n = {} entries (a: {}, b: {})",
                r.n,
                r.a.len(),
                r.b.len()
            ));
        }
        Ok(Self { a0: r.a0, a: r.a, b: r.b })
    }
}

/// Calls `visit(k, cos kx, sin kx)` for `k = 1..=n`.
fn for_each_harmonic(x: f64, n: usize, mut visit: impl FnMut(usize, f64, f64)) {
    let (s1, c1) = x.sin_cos();
    let (mut s, mut c) = (s1, c1);
    for k in 1..=n {
        if k > 1 {
            if k % RESEED == 0 {
                let (sk, ck) = (k as f64 * x).sin_cos();
                s = sk;
                c = ck;
            } else {
                let next_c = c * c1 - s * s1;
                s = s * c1 + c * s1;
                c = next_c;
            }
        }
        visit(k, c, s);
    }
}

impl TrigPoly {
    pub fn new(a0: f64, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::InvalidConfig(format!(
                "cosine and sine coefficient counts differ ({} vs {})",
                a.len(),
                b.len()
            )));
        }
        Ok(Self { a0, a, b })
    }

    pub fn zero(n: usize) -> Self {
        Self { a0: 0.0, a: vec![0.0; n], b: vec![0.0; n] }
    }

    pub fn constant(c: f64, n: usize) -> Self {
        Self { a0: c, ..Self::zero(n) }
    }

    /// `cos(kx)` embedded in degree `n >= k`.
    pub fn cos_harmonic(k: usize, n: usize) -> Self {
        let mut p = Self::zero(n.max(k));
        if k == 0 {
            p.a0 = 1.0;
        } else {
            p.a[k - 1] = 1.0;
        }
        p
    }

    /// `sin(kx)` embedded in degree `n >= k`, `k >= 1`.
    pub fn sin_harmonic(k: usize, n: usize) -> Self {
        assert!(k >= 1);
        let mut p = Self::zero(n.max(k));
        p.b[k - 1] = 1.0;
        p
    }

    pub fn degree(&self) -> usize {
        self.a.len()
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.a
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.b
    }

    /// Coefficient vector in the order `(a0, a_1..a_n, b_1..b_n)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + 2 * self.degree());
        v.push(self.a0);
        v.extend_from_slice(&self.a);
        v.extend_from_slice(&self.b);
        v
    }

    pub fn from_vec(n: usize, v: &[f64]) -> Self {
        assert_eq!(v.len(), 2 * n + 1);
        Self { a0: v[0], a: v[1..=n].to_vec(), b: v[n + 1..].to_vec() }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut sum = self.a0;
        for_each_harmonic(x, self.degree(), |k, c, s| {
            sum += self.a[k - 1] * c + self.b[k - 1] * s;
        });
        sum
    }

    /// Exact derivative; the degree is kept.
    pub fn derivative(&self) -> Self {
        let n = self.degree();
        let mut out = Self::zero(n);
        for k in 1..=n {
            let kf = k as f64;
            out.a[k - 1] = kf * self.b[k - 1];
            out.b[k - 1] = -kf * self.a[k - 1];
        }
        out
    }

    pub fn nth_derivative(&self, order: usize) -> Self {
        (0..order).fold(self.clone(), |p, _| p.derivative())
    }

    /// Antiderivative vanishing at 0, ignoring the mean `a0`.
    ///
    /// Returns the polynomial and the discarded mean so callers can check
    /// that the primitive is actually periodic.
    pub fn antiderivative(&self) -> (Self, f64) {
        let n = self.degree();
        let mut out = Self::zero(n);
        let mut constant = 0.0;
        for k in 1..=n {
            let kf = k as f64;
            out.a[k - 1] = -self.b[k - 1] / kf;
            out.b[k - 1] = self.a[k - 1] / kf;
            constant += self.b[k - 1] / kf;
        }
        out.a0 = constant;
        (out, self.a0)
    }

    /// Zero-padded copy of degree `n >= self.degree()`.
    pub fn resized(&self, n: usize) -> Self {
        let mut out = Self::zero(n.max(self.degree()));
        out.a0 = self.a0;
        out.a[..self.degree()].copy_from_slice(&self.a);
        out.b[..self.degree()].copy_from_slice(&self.b);
        out
    }

    /// `alpha * self + beta * other`, in the larger degree.
    pub fn linear_combination(&self, alpha: f64, other: &Self, beta: f64) -> Self {
        let n = self.degree().max(other.degree());
        let (p, q) = (self.resized(n), other.resized(n));
        Self {
            a0: alpha * p.a0 + beta * q.a0,
            a: p.a.iter().zip(&q.a).map(|(x, y)| alpha * x + beta * y).collect(),
            b: p.b.iter().zip(&q.b).map(|(x, y)| alpha * x + beta * y).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.linear_combination(1.0, other, -1.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.a.iter().chain(&self.b).fold(self.a0.abs(), |m, v| m.max(v.abs()))
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(|x| self.eval(x), 16 * (self.degree() + 1))
            .map(|(v, _)| v)
            .unwrap_or(f64::NAN)
    }
}

/// Discrete Fourier projection with the residual measured on a finer grid.
#[derive(Debug, Clone)]
pub struct Projection {
    pub poly: TrigPoly,
    /// `max |f - p|` over a grid four times finer than the sampling grid.
    pub residual: f64,
}

/// Projection of `f` onto degree `n` from `m >= 2n + 2` uniform samples.
pub fn project_from_samples<F: Fn(f64) -> f64>(f: F, n: usize, m: usize) -> Result<Projection> {
    if m < 2 * n + 2 {
        return Err(Error::GridTooSmall { points: m, required: 2 * n + 2 });
    }
    let grid = PeriodicGrid::new(m)?;
    let mut a0 = 0.0;
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    for x in grid.points() {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFinite { x });
        }
        a0 += v;
        for_each_harmonic(x, n, |k, c, s| {
            a[k - 1] += v * c;
            b[k - 1] += v * s;
        });
    }
    let scale = 2.0 / m as f64;
    a.iter_mut().chain(b.iter_mut()).for_each(|c| *c *= scale);
    let poly = TrigPoly { a0: a0 / m as f64, a, b };

    let fine = PeriodicGrid::new(4 * m)?;
    let residual = fine.points().map(|x| (f(x) - poly.eval(x)).abs()).fold(0.0, f64::max);
    Ok(Projection { poly, residual })
}

/// Sample count used by [`project_from_samples`] callers that only know the degree.
pub fn projection_points(n: usize) -> usize {
    4 * (n + 1)
}

/// Pointwise product `prod sin((x - y_i) / 2)` over a node list.
///
/// With an even number of factors the product is `2 pi`-periodic and is a
/// trigonometric polynomial of half that degree; with an odd number it is
/// `4 pi`-periodic and only used pointwise.
#[derive(Debug, Clone, PartialEq)]
pub struct SineProduct {
    nodes: Vec<f64>,
}

impl SineProduct {
    pub fn new(nodes: &[f64], skip: Option<usize>) -> Result<Self> {
        if let Some(i) = skip {
            if i >= nodes.len() {
                return Err(Error::InvalidNodes(format!("skip index {i} out of range")));
            }
        }
        for (i, &u) in nodes.iter().enumerate() {
            if !u.is_finite() {
                return Err(Error::InvalidNodes(format!("node {u} is not finite")));
            }
            for &v in &nodes[..i] {
                let diff = (u - v).rem_euclid(TWO_PI);
                if diff < 1e-12 || TWO_PI - diff < 1e-12 {
                    return Err(Error::InvalidNodes(format!("duplicate node {u} (mod 2pi)")));
                }
            }
        }
        let nodes = nodes
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != skip)
            .map(|(_, &y)| y)
            .collect();
        Ok(Self { nodes })
    }

    pub fn factor_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_periodic(&self) -> bool {
        self.nodes.len().is_multiple_of(2)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.nodes.iter().map(|&y| (0.5 * (x - y)).sin()).product()
    }

    /// Derivative by the product rule over the factors.
    pub fn derivative(&self, x: f64) -> f64 {
        let sines: Vec<f64> = self.nodes.iter().map(|&y| (0.5 * (x - y)).sin()).collect();
        let n = sines.len();
        let mut prefix = vec![1.0; n + 1];
        for i in 0..n {
            prefix[i + 1] = prefix[i] * sines[i];
        }
        let mut suffix = 1.0;
        let mut sum = 0.0;
        for i in (0..n).rev() {
            sum += 0.5 * (0.5 * (x - self.nodes[i])).cos() * prefix[i] * suffix;
            suffix *= sines[i];
        }
        sum
    }

    /// Coefficient form, available for an even factor count.
    pub fn to_trig_poly(&self) -> Result<Projection> {
        if !self.is_periodic() {
            return Err(Error::InvalidConfig(
                "odd factor count: the product is not 2pi-periodic".into(),
            ));
        }
        let n = self.nodes.len() / 2;
        project_from_samples(|x| self.eval(x), n, projection_points(n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BernsteinReport {
    pub norm: f64,
    pub d1_norm: f64,
    pub d2_norm: f64,
    /// `||p'|| / (n ||p||)`
    pub ratio1: f64,
    /// `||p''|| / (n^2 ||p||)`
    pub ratio2: f64,
    pub pass: bool,
}

/// Sup-norms of `p`, `p'`, `p''` against `||p^(r)|| <= n^r ||p||`.
pub fn bernstein_check(p: &TrigPoly) -> BernsteinReport {
    let n = p.degree().max(1) as f64;
    let d1 = p.derivative();
    let d2 = d1.derivative();
    let norm = p.sup_norm();
    let d1_norm = d1.sup_norm();
    let d2_norm = d2.sup_norm();
    let (ratio1, ratio2) = if norm > 0.0 {
        (d1_norm / (n * norm), d2_norm / (n * n * norm))
    } else {
        (0.0, 0.0)
    };
    let slack = 1.0 + 1e-9;
    BernsteinReport {
        norm,
        d1_norm,
        d2_norm,
        ratio1,
        ratio2,
        pass: ratio1 <= slack && ratio2 <= slack,
    }
}
