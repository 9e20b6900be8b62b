use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::nodes::NodeSet;
use crate::error::{Error, Result};
use crate::jackson::JacksonKernel;
use crate::numerics::{minimize_on_interval, sup_norm};

/// `faithful` derives N from the nodes; `desk` takes an override and only
/// reports invariants that lose their backing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Faithful,
    Desk,
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantsOptions {
    pub mode: Mode,
    pub n_override: Option<usize>,
    pub n_cap: u64,
}

impl ConstantsOptions {
    pub fn faithful() -> Self {
        Self { mode: Mode::Faithful, n_override: None, n_cap: 100_000 }
    }

    pub fn desk(n: usize) -> Self {
        Self { mode: Mode::Desk, n_override: Some(n), n_cap: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantCheck {
    pub name: String,
    pub holds: bool,
    /// Whether a failure is fatal (faithful mode) or only reported.
    pub asserted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstructionConstants {
    pub mode: Mode,
    pub s: usize,
    /// Half the distance from 0 to the nearest other node.
    pub d: f64,
    /// Kernel parameter in use.
    pub kernel_n: usize,
    pub n_overridden: bool,
    /// Smallest N satisfying `m sin^3(d/8) >= (5/N)(M + M1)`, if under the cap.
    pub faithful_n: Option<u64>,
    pub kernel_condition_lhs: f64,
    pub kernel_condition_rhs: f64,
    pub j_star: usize,
    pub d_star: f64,
    /// `max |Pi_*|`
    pub big_m: f64,
    /// `max |Pi_*'|`
    pub big_m1: f64,
    /// `min_{[-d, d]} Pi_*`
    pub small_m: f64,
    pub pi_star_at_zero: f64,
    /// `(1/pi) ||J_N||`
    pub m_tilde_big: f64,
    /// `(1/pi) min_{|t| <= pi/(2N)} J_N(t - d_star)`
    pub m_tilde_small: f64,
    pub m_bar: f64,
    pub m_star: f64,
    pub b_max: f64,
    pub invariants: Vec<InvariantCheck>,
}

impl ConstructionConstants {
    pub fn kernel(&self) -> JacksonKernel {
        JacksonKernel::new(self.kernel_n)
    }

    /// Degree of `Q_b` as a trigonometric polynomial, `2N + s - 1`.
    pub fn q_degree(&self) -> usize {
        2 * self.kernel_n + self.s - 1
    }

    pub fn all_asserted_hold(&self) -> bool {
        self.invariants.iter().all(|c| c.holds || !c.asserted)
    }
}

fn kernel_condition_holds(lhs: f64, total: f64, n: u64) -> bool {
    lhs >= 5.0 / n as f64 * total
}

/// Every scalar of the construction for a normalised node set.
pub fn compute_constants(nodes: &NodeSet, opts: &ConstantsOptions) -> Result<ConstructionConstants> {
    let pi_star = nodes.pi_star();
    let base = 256 * nodes.s();
    let d = nodes.half_gap();
    let (big_m, _) = sup_norm(|x| pi_star.eval(x), base)?;
    let (big_m1, _) = sup_norm(|x| pi_star.derivative(x), base)?;
    let (small_m, _) = minimize_on_interval(|x| pi_star.eval(x), -d, d, 513)?;
    let pi_star_at_zero = pi_star.eval(0.0);

    let kernel_condition_lhs = small_m * (d / 8.0).sin().powi(3);
    let total = big_m + big_m1;
    let faithful_n = if kernel_condition_lhs > 0.0 {
        let mut n = (5.0 * total / kernel_condition_lhs).ceil().max(1.0) as u64;
        while !kernel_condition_holds(kernel_condition_lhs, total, n) {
            n += 1;
        }
        while n > 1 && kernel_condition_holds(kernel_condition_lhs, total, n - 1) {
            n -= 1;
        }
        Some(n)
    } else {
        None
    };

    let (kernel_n, n_overridden) = match opts.mode {
        Mode::Faithful => match faithful_n {
            Some(n) if n <= opts.n_cap => (n as usize, false),
            Some(n) => return Err(Error::KernelCap { required: n, cap: opts.n_cap }),
            None => {
                return Err(Error::InvalidConfig("Pi_* is not positive near 0; the kernel degree condition has no solution".into()))
            }
        },
        Mode::Desk => match opts.n_override {
            Some(n) if n >= 1 => (n, true),
            _ => return Err(Error::InvalidConfig("desk mode needs a positive N override".into())),
        },
    };
    let nf = kernel_n as f64;
    let kernel_condition_rhs = 5.0 / nf * total;

    // largest j with pi/N + j 2pi/N <= d
    let j_raw = (d - PI / nf) / (2.0 * PI / nf);
    let j_star = if j_raw < 0.0 { 0 } else { (j_raw + 1e-9).floor() as usize };
    let d_star = PI / nf + j_star as f64 * 2.0 * PI / nf;

    let kernel = JacksonKernel::new(kernel_n);
    let m_tilde_big = kernel.sup_norm() / PI;
    let half = PI / (2.0 * nf);
    let (kmin, _) = minimize_on_interval(|t| kernel.eval(t), d_star - half, d_star + half, 257)?;
    let m_tilde_small = kmin / PI;
    let m_bar = 2.0 + PI.powi(3) * (big_m * m_tilde_big / (small_m * m_tilde_small)).sqrt();
    let m_star = small_m * m_tilde_small / (2.0 * PI * PI * big_m);
    let b_max = PI / (2.0 * nf * m_bar);

    let faithful = opts.mode == Mode::Faithful;
    let check = |name: &str, holds: bool, asserted: bool| InvariantCheck { name: name.into(), holds, asserted };
    let invariants = vec![
        check("d <= pi/2", d <= PI / 2.0 * (1.0 + 1e-15), true),
        check("Pi_*(0) > 0", pi_star_at_zero > 0.0, true),
        check("m > 0", small_m > 0.0, true),
        check("m sin^3(d/8) >= (5/N)(M + M1)", kernel_condition_holds(kernel_condition_lhs, total, kernel_n as u64), faithful),
        check("d > 40/N", d > 40.0 / nf, faithful),
        check("d/2 < d* <= d", d / 2.0 < d_star && d_star <= d * (1.0 + 1e-12), faithful),
        check("m_tilde > 0", m_tilde_small > 0.0, true),
        check("(d* - 2 b_max)/2 > d/8", (d_star - 2.0 * b_max) / 2.0 > d / 8.0, faithful),
    ];
    if let Some(bad) = invariants.iter().find(|c| c.asserted && !c.holds) {
        return Err(Error::InvalidConfig(format!("construction invariant violated: {}", bad.name)));
    }

    Ok(ConstructionConstants {
        mode: opts.mode,
        s: nodes.s(),
        d,
        kernel_n,
        n_overridden,
        faithful_n,
        kernel_condition_lhs,
        kernel_condition_rhs,
        j_star,
        d_star,
        big_m,
        big_m1,
        small_m,
        pi_star_at_zero,
        m_tilde_big,
        m_tilde_small,
        m_bar,
        m_star,
        b_max,
        invariants,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::nodes::normalize_nodes;

    #[test]
    fn symmetric_pair_closed_forms() {
        let ns = normalize_nodes(&[0.0, -PI]).unwrap();
        let c = compute_constants(&ns, &ConstantsOptions::desk(8)).unwrap();
        assert!((c.d - PI / 2.0).abs() < 1e-15);
        assert!((c.big_m - 1.0).abs() < 1e-12);
        assert!((c.big_m1 - 0.5).abs() < 1e-12);
        assert!((c.small_m - (PI / 4.0).cos()).abs() < 1e-12);
        assert_eq!(c.j_star, 1);
        assert!((c.d_star - 3.0 * PI / 8.0).abs() < 1e-15);
        assert!(c.n_overridden);
        assert!((c.b_max - PI / (16.0 * c.m_bar)).abs() < 1e-18);
        assert!((c.m_star - c.small_m * c.m_tilde_small / (2.0 * PI * PI * c.big_m)).abs() < 1e-20);
    }

    #[test]
    fn faithful_n_is_minimal() {
        let ns = normalize_nodes(&[0.0, -PI]).unwrap();
        let c = compute_constants(&ns, &ConstantsOptions::faithful()).unwrap();
        let n = c.kernel_n as u64;
        let lhs = (PI / 4.0).cos() * (PI / 16.0).sin().powi(3);
        assert!(lhs >= 7.5 / n as f64);
        assert!(lhs < 7.5 / (n - 1) as f64);
        assert_eq!(c.faithful_n, Some(n));
        assert!(c.all_asserted_hold());
        assert!(c.d_star > c.d / 2.0 && c.d_star <= c.d);
        assert!((c.d_star - 2.0 * c.b_max) / 2.0 > c.d / 8.0);
    }

    #[test]
    fn faithful_cap_is_enforced() {
        let ns = normalize_nodes(&[0.0, -PI]).unwrap();
        let opts = ConstantsOptions { n_cap: 100, ..ConstantsOptions::faithful() };
        assert!(matches!(compute_constants(&ns, &opts), Err(Error::KernelCap { cap: 100, .. })));
    }

    #[test]
    fn desk_requires_override() {
        let ns = normalize_nodes(&[0.0, -PI]).unwrap();
        let opts = ConstantsOptions { n_override: None, ..ConstantsOptions::desk(1) };
        assert!(compute_constants(&ns, &opts).is_err());
    }

    #[test]
    fn desk_reports_instead_of_failing() {
        let ns = normalize_nodes(&[0.0, -1.0, -2.0, -3.0]).unwrap();
        let c = compute_constants(&ns, &ConstantsOptions::desk(2)).unwrap();
        let cond = c.invariants.iter().find(|i| i.name.starts_with("m sin^3")).unwrap();
        assert!(!cond.holds && !cond.asserted);
        assert!(c.m_tilde_small > 0.0);
    }
}
