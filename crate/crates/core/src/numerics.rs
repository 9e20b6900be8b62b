//! Quadrature, sup-norm search and finite differences on one period.
//!
//! Full-period integrals use the uniform rule, which is exact for
//! trigonometric polynomials of degree below half the point count.
//! Partial-interval integrals use adaptive Simpson.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const TWO_PI: f64 = 2.0 * PI;

/// Default tolerance for partial-interval integrals.
pub const DEFAULT_TOL: f64 = 1e-11;

const MAX_SIMPSON_INTERVALS: usize = 1 << 20;
const GOLDEN_REL_TOL: f64 = 1e-12;
/// Segments whose Simpson correction is at rounding level are accepted
/// regardless of the requested tolerance.
const ROUNDING_FLOOR: f64 = 16.0 * f64::EPSILON;

/// Uniform abscissae `-pi + 2 pi j / m`, `j = 0..m`, covering one period
/// without a duplicated endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodicGrid {
    m: usize,
}

impl PeriodicGrid {
    pub fn new(m: usize) -> Result<Self> {
        if m < 4 {
            return Err(Error::GridTooSmall { points: m, required: 4 });
        }
        Ok(Self { m })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        TWO_PI / self.m as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        -PI + TWO_PI * j as f64 / self.m as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.m).map(move |j| self.point(j))
    }
}

/// Point count for full-period integrals of the construction's integrands:
/// `8 (2N + s + 2)` rounded up to a power of two.
pub fn default_point_count(kernel_n: usize, s: usize) -> usize {
    (8 * (2 * kernel_n + s + 2)).next_power_of_two()
}

/// Integral over one period by the uniform rule `(2 pi / m) sum f(x_j)`.
pub fn periodic_integral<F: Fn(f64) -> f64>(f: F, m: usize) -> Result<f64> {
    let grid = PeriodicGrid::new(m)?;
    let mut sum = 0.0;
    for x in grid.points() {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFinite { x });
        }
        sum += v;
    }
    Ok(sum * grid.spacing())
}

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Adaptive Simpson on `[a, b]` with an absolute tolerance.
///
/// Returns `(value, error_bound)`. The interval is pre-split into four
/// segments so integrands vanishing at the coarse nodes are still resolved.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    let eval = |x: f64| -> Result<f64> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { x })
        }
    };

    const INITIAL: usize = 4;
    let width = (b - a) / INITIAL as f64;
    let mut stack = Vec::with_capacity(64);
    let mut left = eval(a)?;
    for i in 0..INITIAL {
        let sa = a + width * i as f64;
        let sb = if i + 1 == INITIAL { b } else { a + width * (i + 1) as f64 };
        let fm = eval(0.5 * (sa + sb))?;
        let fb = eval(sb)?;
        stack.push(Segment {
            a: sa,
            b: sb,
            fa: left,
            fm,
            fb,
            whole: simpson(sa, sb, left, fm, fb),
            tol: abs_tol / INITIAL as f64,
        });
        left = fb;
    }

    let scale = stack.iter().map(|s| s.fa.abs().max(s.fm.abs()).max(s.fb.abs())).fold(0.0, f64::max);
    let mut total = 0.0;
    let mut error = 0.0;
    let mut splits = 0usize;
    while let Some(seg) = stack.pop() {
        let m = 0.5 * (seg.a + seg.b);
        let lm = 0.5 * (seg.a + m);
        let rm = 0.5 * (m + seg.b);
        let flm = eval(lm)?;
        let frm = eval(rm)?;
        let l = simpson(seg.a, m, seg.fa, flm, seg.fm);
        let r = simpson(m, seg.b, seg.fm, frm, seg.fb);
        let delta = l + r - seg.whole;
        let tiny = (seg.b - seg.a).abs() <= 4.0 * f64::EPSILON * (seg.a.abs() + seg.b.abs());
        let floor = ROUNDING_FLOOR * (l.abs() + r.abs() + scale * (seg.b - seg.a).abs());
        if delta.abs() <= 15.0 * seg.tol.max(floor) || tiny {
            total += l + r + delta / 15.0;
            error += delta.abs() / 15.0;
            continue;
        }
        splits += 1;
        if splits > MAX_SIMPSON_INTERVALS {
            let mut estimate = total + l + r + delta / 15.0;
            let mut bound = error + delta.abs() / 15.0;
            for s in &stack {
                let m = 0.5 * (s.a + s.b);
                let l = simpson(s.a, m, s.fa, eval(0.5 * (s.a + m))?, s.fm);
                let r = simpson(m, s.b, s.fm, eval(0.5 * (m + s.b))?, s.fb);
                let d = l + r - s.whole;
                estimate += l + r + d / 15.0;
                bound += d.abs() / 15.0;
            }
            return Err(Error::SubdivisionLimit { estimate, error_bound: bound });
        }
        let half = 0.5 * seg.tol;
        stack.push(Segment { a: m, b: seg.b, fa: seg.fm, fm: frm, fb: seg.fb, whole: r, tol: half });
        stack.push(Segment { a: seg.a, b: m, fa: seg.fa, fm: flm, fb: seg.fm, whole: l, tol: half });
    }
    Ok((total, error))
}

/// `int_0^x f(t) dt` for `x` in `[-2 pi, 2 pi]`, with estimated error at
/// most `tol (1 + |result|)`.
pub fn cumulative_integral<F: Fn(f64) -> f64>(f: F, x: f64, tol: f64) -> Result<f64> {
    if !(-TWO_PI..=TWO_PI).contains(&x) {
        return Err(Error::OutOfDomain { x });
    }
    if x >= 0.0 {
        adaptive_simpson(&f, 0.0, x, tol).map(|(v, _)| v)
    } else {
        adaptive_simpson(&f, x, 0.0, tol).map(|(v, _)| -v)
    }
}

/// Golden-section maximisation of `f` on `[lo, hi]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > GOLDEN_REL_TOL * (1.0 + lo.abs().max(hi.abs())) {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Maximum of `f` over `[a, b]`: uniform scan of `points` samples
/// (endpoints included), then golden-section refinement around the best one.
/// Returns `(value, location)`.
pub fn maximize_on_interval<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, points: usize) -> Result<(f64, f64)> {
    let points = points.max(3);
    let h = (b - a) / (points - 1) as f64;
    let mut best = (f64::NEG_INFINITY, a);
    let mut best_j = 0;
    for j in 0..points {
        let x = if j + 1 == points { b } else { a + h * j as f64 };
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFinite { x });
        }
        if v > best.0 {
            best = (v, x);
            best_j = j;
        }
    }
    let lo = if best_j == 0 { a } else { a + h * (best_j - 1) as f64 };
    let hi = if best_j + 1 >= points { b } else { a + h * (best_j + 1) as f64 };
    let (x, v) = golden_max(&f, lo, hi);
    if v > best.0 {
        best = (v, x);
    }
    Ok(best)
}

/// Minimum of `f` over `[a, b]`, same search as [`maximize_on_interval`].
pub fn minimize_on_interval<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, points: usize) -> Result<(f64, f64)> {
    let (v, x) = maximize_on_interval(|t| -f(t), a, b, points)?;
    Ok((-v, x))
}

/// `max |f|` over one period: grid scan on `base_points` uniform
/// abscissae, then bracketed golden-section refinement around the largest
/// few local maxima of the scan, since near-tied peaks can swap order
/// between grid and continuum. Returns `(value, argmax)`.
pub fn sup_norm<F: Fn(f64) -> f64>(f: F, base_points: usize) -> Result<(f64, f64)> {
    const CANDIDATES: usize = 8;
    let grid = PeriodicGrid::new(base_points)?;
    let mut values = Vec::with_capacity(base_points);
    for x in grid.points() {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFinite { x });
        }
        values.push(v.abs());
    }
    let m = values.len();
    let mut peaks: Vec<usize> = (0..m)
        .filter(|&j| values[j] >= values[(j + m - 1) % m] && values[j] >= values[(j + 1) % m])
        .collect();
    peaks.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    peaks.truncate(CANDIDATES);

    let h = grid.spacing();
    let mut best = (f64::NEG_INFINITY, -PI);
    for &j in &peaks {
        let centre = grid.point(j);
        if values[j] > best.0 {
            best = (values[j], centre);
        }
        let (x, v) = golden_max(&|t: f64| f(t).abs(), centre - h, centre + h);
        if v > best.0 {
            best = (v, x);
        }
    }
    Ok(best)
}

fn binomial(k: usize, j: usize) -> f64 {
    let mut c = 1.0;
    for i in 0..j {
        c = c * (k - i) as f64 / (i + 1) as f64;
    }
    c.round()
}

/// Forward difference `sum_{j=0}^{k} (-1)^{k-j} C(k, j) f(x + j h)`.
///
/// Orders up to 12 keep the binomial coefficients exact.
pub fn finite_difference<F: Fn(f64) -> f64>(f: F, x: f64, h: f64, k: usize) -> f64 {
    assert!((1..=12).contains(&k), "difference order {k} outside 1..=12");
    let mut sum = 0.0;
    for j in 0..=k {
        let sign = if (k - j).is_multiple_of(2) { 1.0 } else { -1.0 };
        sum += sign * binomial(k, j) * f(x + j as f64 * h);
    }
    sum
}

/// Reduce `x` to `[-pi, pi)`.
pub fn wrap_to_period(x: f64) -> f64 {
    // leave in-range values untouched so small arguments keep full precision
    if (-PI..PI).contains(&x) {
        return x;
    }
    let mut r = (x + PI).rem_euclid(TWO_PI) - PI;
    if r >= PI {
        r -= TWO_PI;
    }
    r
}
