//! The Jackson kernel `J_N(t) = 3 / (2N (2N^2 + 1)) (sin(Nt/2) / sin(t/2))^4`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::numerics::{periodic_integral, sup_norm};

/// Below this `|sin(t/2)|` the ratio is evaluated as `U_{N-1}(cos(t/2))`.
const SINGULAR_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JacksonKernel {
    n: usize,
}

impl JacksonKernel {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Jackson kernel parameter must be positive");
        Self { n }
    }

    pub fn parameter(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        2 * self.n - 2
    }

    fn scale(&self) -> f64 {
        let nf = self.n as f64;
        3.0 / (2.0 * nf * (2.0 * nf * nf + 1.0))
    }

    /// `sin(N u) / sin(u)` near a zero of `sin u`, via the Chebyshev
    /// recurrence for `U_{N-1}(cos u)`.
    fn dirichlet_ratio(&self, u: f64) -> f64 {
        let c = u.cos();
        let (mut prev, mut cur) = (1.0, 2.0 * c);
        if self.n == 1 {
            return 1.0;
        }
        for _ in 2..self.n {
            let next = 2.0 * c * cur - prev;
            prev = cur;
            cur = next;
        }
        cur
    }

    pub fn eval(&self, t: f64) -> f64 {
        let u = 0.5 * t;
        let den = u.sin();
        let ratio = if den.abs() < SINGULAR_THRESHOLD {
            self.dirichlet_ratio(u)
        } else {
            (self.n as f64 * u).sin() / den
        };
        self.scale() * ratio.powi(4)
    }

    /// `J_N(0) = 3 N^3 / (2 (2 N^2 + 1))`, where the maximum sits.
    pub fn value_at_zero(&self) -> f64 {
        let nf = self.n as f64;
        3.0 * nf.powi(3) / (2.0 * (2.0 * nf * nf + 1.0))
    }

    /// Point count that integrates any product of the kernel with a
    /// trigonometric polynomial of degree `extra` exactly.
    pub fn quadrature_points(&self, extra: usize) -> usize {
        (4 * (self.degree() + extra + 2)).next_power_of_two().max(16)
    }

    /// `||J_N||`, found by a grid scan seeded at `t = 0` and cross-checked
    /// against the closed form.
    pub fn sup_norm(&self) -> f64 {
        let closed = self.value_at_zero();
        let (scanned, _) = sup_norm(|t| self.eval(t), 16 * (self.degree() + 1).max(4))
            .expect("kernel values are finite");
        closed.max(scanned)
    }

    /// `|(1/pi) int J_N - 1|`.
    pub fn normalization_residual(&self) -> f64 {
        let m = self.quadrature_points(0);
        let integral = periodic_integral(|t| self.eval(t), m).expect("kernel values are finite");
        (integral / PI - 1.0).abs()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelBoundReport {
    /// `max_x |(1/pi) int (g(t) - g(x)) J_N(t - x) dt|`.
    pub max_deviation: f64,
    /// `(5 / N) ||g'||`.
    pub bound: f64,
    pub max_ratio: f64,
    pub worst_x: f64,
    pub pass: bool,
}

/// Checks `|(1/pi) int (g(t) - g(x)) J_N(t - x) dt| <= (5/N) ||g'||` at every
/// point of `x_grid`. `quad_points` must integrate `g * J_N` exactly (or to
/// the caller's satisfaction).
pub fn kernel_approx_bound_check<G: Fn(f64) -> f64>(
    g: G,
    g_prime_norm: f64,
    kernel: &JacksonKernel,
    x_grid: &[f64],
    quad_points: usize,
) -> KernelBoundReport {
    let bound = 5.0 / kernel.parameter() as f64 * g_prime_norm;
    let mut max_deviation: f64 = 0.0;
    let mut worst_x = x_grid.first().copied().unwrap_or(0.0);
    for &x in x_grid {
        let gx = g(x);
        let v = periodic_integral(|t| (g(t) - gx) * kernel.eval(t - x), quad_points)
            .expect("finite integrand")
            / PI;
        if v.abs() > max_deviation {
            max_deviation = v.abs();
            worst_x = x;
        }
    }
    let max_ratio = if bound > 0.0 { max_deviation / bound } else { 0.0 };
    KernelBoundReport {
        max_deviation,
        bound,
        max_ratio,
        worst_x,
        pass: max_deviation <= bound * (1.0 + 1e-9),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_one_is_constant_half() {
        let k = JacksonKernel::new(1);
        for &t in &[0.0, 0.5, -2.0, 3.0] {
            assert!((k.eval(t) - 0.5).abs() < 1e-15);
        }
        assert!(k.normalization_residual() < 1e-15);
    }

    #[test]
    fn value_at_zero_and_zeros() {
        let k = JacksonKernel::new(4);
        assert!((k.eval(0.0) - 96.0 / 33.0).abs() < 1e-13);
        assert!(k.eval(2.0 * PI / 4.0).abs() < 1e-28);
        assert_eq!(k.degree(), 6);
    }

    #[test]
    fn branches_agree_across_the_threshold() {
        let k = JacksonKernel::new(12);
        for &t in &[2.0e-6f64, 2.5e-6, 3.0e-6] {
            let u = 0.5 * t;
            let direct = (12.0 * u).sin() / u.sin();
            let rec = k.dirichlet_ratio(u);
            assert!(((direct - rec) / rec).abs() < 1e-10);
        }
        // near t = 2 pi as well
        let t = 2.0 * PI - 1e-7;
        let near = k.eval(t);
        assert!((near - k.value_at_zero()).abs() / k.value_at_zero() < 1e-10);
    }

    #[test]
    fn even_and_non_negative() {
        let k = JacksonKernel::new(9);
        for j in 0..2000 {
            let t = -PI + 2.0 * PI * j as f64 / 2000.0;
            assert!((k.eval(t) - k.eval(-t)).abs() <= 1e-12);
            assert!(k.eval(t) >= -1e-14);
        }
    }

    #[test]
    fn sup_norm_sits_at_zero() {
        let k = JacksonKernel::new(16);
        assert!((k.sup_norm() - k.value_at_zero()).abs() < 1e-12 * k.value_at_zero());
    }

    #[test]
    fn bound_check_constant_is_zero() {
        let k = JacksonKernel::new(8);
        let xs: Vec<f64> = (0..16).map(|j| -PI + j as f64 * PI / 8.0).collect();
        let r = kernel_approx_bound_check(|_| 2.5, 0.0, &k, &xs, 64);
        assert!(r.max_deviation < 1e-14);
        assert!(r.pass);
    }
}
