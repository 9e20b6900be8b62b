//! Modulus of smoothness `omega_k(f; t) = sup_{0 < h <= t} sup_x |Delta_h^k f(x)|`,
//! estimated from below by grid maximisation.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::numerics::{finite_difference, TWO_PI};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusQuery {
    pub k: usize,
    pub t: f64,
    pub x_points: usize,
    pub h_points: usize,
}

impl ModulusQuery {
    /// Production resolution: 2048 abscissae by 128 steps.
    pub fn new(k: usize, t: f64) -> Self {
        Self { k, t, x_points: 2048, h_points: 128 }
    }

    pub fn with_grid(self, x_points: usize, h_points: usize) -> Self {
        Self { x_points, h_points, ..self }
    }

    /// Step grid in `(0, t]`: three quarters uniform, the rest geometric
    /// towards `t`.
    pub fn steps(&self) -> Vec<f64> {
        let total = self.h_points.max(4);
        let uniform = (3 * total / 4).max(1);
        let mut hs: Vec<f64> = (1..=uniform).map(|j| self.t * j as f64 / uniform as f64).collect();
        let gap = self.t / uniform as f64;
        hs.extend((1..=total - uniform).map(|i| self.t - gap * 0.5f64.powi(i as i32)));
        hs
    }
}

/// Grid estimate of `omega_k(f; t)` for a `2 pi`-periodic `f`.
pub fn modulus<F: Fn(f64) -> f64 + Sync>(f: &F, q: &ModulusQuery) -> f64 {
    assert!(q.t > 0.0, "step bound must be positive");
    let hs = q.steps();
    (0..q.x_points)
        .into_par_iter()
        .map(|j| {
            let x = -PI + TWO_PI * j as f64 / q.x_points as f64;
            hs.iter()
                .map(|&h| finite_difference(f, x, h, q.k).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// `omega_k` at several step bounds, monotone in `t`: each entry is the
/// maximum over the grids of every bound not exceeding it.
pub fn modulus_profile<F: Fn(f64) -> f64 + Sync>(f: &F, k: usize, ts: &[f64], x_points: usize, h_points: usize) -> Vec<f64> {
    let mut order: Vec<usize> = (0..ts.len()).collect();
    order.sort_by(|&a, &b| ts[a].total_cmp(&ts[b]));
    let mut out = vec![0.0; ts.len()];
    let mut running: f64 = 0.0;
    for i in order {
        let q = ModulusQuery { k, t: ts[i], x_points, h_points };
        running = running.max(modulus(f, &q));
        out[i] = running;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steps_stay_in_range_and_end_at_t() {
        let q = ModulusQuery::new(2, 0.3);
        let hs = q.steps();
        assert_eq!(hs.len(), 128);
        assert!(hs.iter().all(|&h| h > 0.0 && h <= 0.3));
        assert!(hs.contains(&0.3));
    }

    #[test]
    fn constants_have_zero_modulus() {
        let q = ModulusQuery::new(3, 0.5).with_grid(64, 16);
        assert_eq!(modulus(&|_| 7.0, &q), 0.0);
    }

    #[test]
    fn first_order_cos() {
        let t = PI / 2.0;
        let v = modulus(&f64::cos, &ModulusQuery::new(1, t));
        let exact = 2.0 * (t / 2.0).sin();
        assert!(((v - exact) / exact).abs() < 2e-3);
        assert!(v <= exact * (1.0 + 1e-12));
    }

    #[test]
    fn profile_is_monotone() {
        let f = |x: f64| x.sin() + 0.3 * (5.0 * x).cos();
        let ts = [0.4, 0.1, 0.2, 0.15];
        let w = modulus_profile(&f, 2, &ts, 256, 32);
        assert!(w[1] <= w[3] && w[3] <= w[2] && w[2] <= w[0]);
    }
}
