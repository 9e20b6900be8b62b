//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints its verdict line regardless of outcome; the process exits non-zero
//! if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use comono_lab::construction::{
    build_counterexample, compute_constants, normalize_nodes, solve_alpha, solve_gamma, BuildOptions,
    ConstantsOptions, ConstructionConstants, CounterexampleFunction, NodeSet, TroughShape,
};
use comono_lab::jackson::{kernel_approx_bound_check, JacksonKernel};
use comono_lab::numerics::{periodic_integral, sup_norm, PeriodicGrid};
use comono_lab::shapeapprox::{
    lp_solve, ratio_experiment, Constraint, LinearProgram, LpOptions, LpStatus, RatioOptions, RowRelation, VarBound,
};
use comono_lab::smoothness::{modulus, ModulusQuery};
use comono_lab::trig::TrigPoly;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const K: usize = 4;
const DESK_N: usize = 8;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn flagship() -> (NodeSet, ConstructionConstants) {
    let nodes = normalize_nodes(&[0.0, -PI]).unwrap();
    let constants = compute_constants(&nodes, &ConstantsOptions::desk(DESK_N)).unwrap();
    (nodes, constants)
}

fn flagship_b16(nodes: &NodeSet, constants: &ConstructionConstants) -> CounterexampleFunction {
    build_counterexample(nodes, constants, K, 16, &BuildOptions::default()).unwrap()
}

fn kernel_normalization() -> Verdict {
    let mut worst: f64 = 0.0;
    for n in [1usize, 2, 4, 8, 16, 64] {
        let kernel = JacksonKernel::new(n);
        // Oracle: the trapezoid rule on more than 2 deg + 1 points is exact for
        // a polynomial of degree deg = 2N - 2.
        let m = (4 * n).max(8);
        let integral = periodic_integral(|t| kernel.eval(t), m).unwrap();
        worst = worst.max((integral / PI - 1.0).abs()).max(kernel.normalization_residual());
    }
    Verdict::new(worst <= 1e-10, format!("max residual {worst:.3e} <= 1e-10"))
}

fn kernel_bound() -> Verdict {
    let grid: Vec<f64> = PeriodicGrid::new(256).unwrap().points().collect();
    let mut parts = Vec::new();
    let mut pass = true;
    for n in [16usize, 64] {
        let kernel = JacksonKernel::new(n);
        let report = kernel_approx_bound_check(f64::sin, 1.0, &kernel, &grid, 8 * n);
        let limit = 5.0 / n as f64 * (1.0 + 1e-9);
        pass &= report.max_deviation <= limit;
        parts.push(format!("N={n}: {:.4e} <= {:.4e}", report.max_deviation, limit));
    }
    Verdict::new(pass, parts.join(", "))
}

fn alpha_balance() -> Verdict {
    let (nodes, constants) = flagship();
    let b = 16f64.powf(-(K as f64) / 3.0).min(0.999 * constants.b_max);
    let a = solve_alpha(&nodes, &constants, b).unwrap();
    let pass = a.q_right > 0.0
        && a.q_left < 0.0
        && a.alpha > 0.0
        && a.alpha < 1.0
        && a.residual <= 1e-9 * a.scale
        && (a.alpha - 0.5).abs() <= 1e-9;
    Verdict::new(
        pass,
        format!(
            "b={b:.6e} Q_r={:.4e} Q_l={:.4e} alpha={:.12} residual/scale={:.2e}",
            a.q_right,
            a.q_left,
            a.alpha,
            a.residual / a.scale
        ),
    )
}

fn gamma_balance() -> Verdict {
    let (nodes, constants) = flagship();
    let b = 16f64.powf(-(K as f64) / 3.0).min(0.999 * constants.b_max);
    let a = solve_alpha(&nodes, &constants, b).unwrap();
    let g = solve_gamma(&nodes, &constants, b, a.alpha, TroughShape::PiecewiseLinear).unwrap();
    let pass = g.i_right > 0.0
        && g.i_left < 0.0
        && g.gamma > 0.0
        && g.gamma < 1.0
        && g.residual <= 1e-9 * g.scale
        && (g.gamma - 0.5).abs() <= 1e-9;
    Verdict::new(
        pass,
        format!(
            "I1={:.4e} I2={:.4e} gamma={:.12} residual/scale={:.2e}",
            g.i_right,
            g.i_left,
            g.gamma,
            g.residual / g.scale
        ),
    )
}

fn shape_norm_curvature() -> Verdict {
    let (nodes, constants) = flagship();
    let cf = flagship_b16(&nodes, &constants);
    let c = cf.constants();
    let b = cf.b();
    let mut checks: Vec<(String, bool)> = Vec::new();

    let near: f64 = (0..=2000).map(|j| cf.eval_g(-b + 2.0 * b * j as f64 / 2000.0).abs()).fold(0.0, f64::max);
    checks.push((format!("max|g| on [-b,b]={near:.2e}"), near <= 1e-12));

    let mut worst_sign = f64::INFINITY;
    for iv in nodes.intervals() {
        for j in 0..=4000 {
            let x = iv.left + (iv.right - iv.left) * j as f64 / 4000.0;
            worst_sign = worst_sign.min(iv.sign * cf.eval_g_prime(x));
        }
    }
    checks.push((format!("min sigma g'={worst_sign:.2e}"), worst_sign >= -1e-12));

    let (g_norm, _) = sup_norm(|x| cf.eval_g(x), 8192).unwrap();
    checks.push((format!("||g||={g_norm:.4e}"), g_norm < 1.0));
    let (gp_norm, _) = sup_norm(|x| cf.eval_g_prime(x), 8192).unwrap();
    checks.push((format!("||g'||={gp_norm:.4e}<{:.4e}", c.m_tilde_big), gp_norm < c.m_tilde_big));

    let (gq, _) = sup_norm(|x| cf.eval_g_minus_q(x).unwrap(), 8192).unwrap();
    let gq_bound = c.m_tilde_big * c.m_bar.powi(4) * b.powi(4) / 8.0;
    checks.push((format!("||g-Q||={gq:.3e}<={gq_bound:.3e}"), gq <= gq_bound));

    let q2 = cf.q_second_at_zero();
    let q2_bound = -(c.small_m * c.m_tilde_small / c.big_m) * b * b / (2.0 * PI * PI);
    checks.push((format!("Q''(0)={q2:.4e}<{q2_bound:.4e}"), q2 < q2_bound));

    // Central differences of Q' at h and h/10, Richardson-combined in h^2.
    // Q'(x) ~ x (x^2 - b^2) near 0, so the expansion is in h^2 / b^2 and the
    // steps must sit well inside [-b, b].
    let d = |h: f64| (cf.eval_q_prime(h) - cf.eval_q_prime(-h)) / (2.0 * h);
    let fd = (100.0 * d(b * 1e-3) - d(b * 1e-2)) / 99.0;
    let rel = (fd - q2).abs() / q2.abs();
    checks.push((format!("fd rel gap={rel:.2e}"), rel <= 1e-6));

    let pass = checks.iter().all(|(_, ok)| *ok);
    let detail = checks.iter().map(|(s, ok)| if *ok { s.clone() } else { format!("[x] {s}") }).collect::<Vec<_>>();
    Verdict::new(pass, detail.join("; "))
}

fn modulus_bound() -> Verdict {
    let (nodes, constants) = flagship();
    let cf = flagship_b16(&nodes, &constants);
    let c = cf.constants();
    let b = cf.b();
    let m_k = cf.q_prime_poly().unwrap().poly.nth_derivative(K).sup_norm();
    let mut pass = true;
    let mut parts = Vec::new();
    for t in [1.0 / 16.0, 1.0 / 8.0] {
        let omega = modulus(&|x| cf.eval_g_prime(x), &ModulusQuery::new(K, t));
        let bound = 2f64.powi(K as i32 - 3) * c.m_bar.powi(3) * c.m_tilde_big * b.powi(3) + t.powi(K as i32) * m_k;
        pass &= omega <= bound;
        parts.push(format!("t={t}: {omega:.4e} <= {bound:.4e} (slack {:.3})", omega / bound));
    }
    Verdict::new(pass, parts.join(", "))
}

fn bernstein_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let n = 1 + case % 32;
        let p = common::random_trig_poly(&mut rng, n);
        let norm = p.sup_norm();
        let r1 = p.derivative().sup_norm() / (n as f64 * norm);
        let r2 = p.nth_derivative(2).sup_norm() / ((n * n) as f64 * norm);
        worst = worst.max(r1).max(r2);
    }
    let mut eq_gap: f64 = 0.0;
    for n in [1usize, 5, 17, 32] {
        let s = TrigPoly::sin_harmonic(n, n);
        let norm = s.sup_norm();
        let r1 = s.derivative().sup_norm() / (n as f64 * norm);
        let r2 = s.nth_derivative(2).sup_norm() / ((n * n) as f64 * norm);
        eq_gap = eq_gap.max((r1 - 1.0).abs()).max((r2 - 1.0).abs());
    }
    Verdict::new(
        worst <= 1.0 + 1e-9 && eq_gap <= 1e-6,
        format!("max ratio {worst:.12} <= 1+1e-9, sin(nx) gap {eq_gap:.2e} <= 1e-6"),
    )
}

fn modulus_oracle() -> Verdict {
    let mut worst: f64 = 0.0;
    for k in [1usize, 3] {
        for t in [0.1, PI / 2.0] {
            let est = modulus(&f64::cos, &ModulusQuery::new(k, t));
            let exact = (2.0 * (t / 2.0).sin()).powi(k as i32);
            worst = worst.max((est - exact).abs() / exact);
        }
    }
    Verdict::new(worst <= 2e-3, format!("max relative gap {worst:.3e} <= 2e-3"))
}

fn lp_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let opts = LpOptions::default();
    let mut worst: f64 = 0.0;
    let mut status_ok = true;
    for _ in 0..50 {
        let vars = rng.gen_range(1..=6);
        let lp = common::random_bounded_lp(&mut rng, vars);
        let oracle = common::vertex_enumeration_min(&lp).expect("generated LPs are feasible");
        let sol = lp_solve(&lp, &opts).unwrap();
        status_ok &= sol.status == LpStatus::Optimal;
        worst = worst.max((sol.objective_value - oracle).abs());
    }
    let infeasible = LinearProgram {
        objective: vec![1.0, 1.0],
        constraints: vec![
            Constraint::new(vec![1.0, 1.0], RowRelation::Le, 1.0),
            Constraint::new(vec![1.0, 1.0], RowRelation::Ge, 2.0),
        ],
        bounds: vec![VarBound::NON_NEGATIVE; 2],
    };
    let unbounded = LinearProgram {
        objective: vec![-1.0, 0.0],
        constraints: vec![Constraint::new(vec![1.0, -1.0], RowRelation::Le, 1.0)],
        bounds: vec![VarBound::NON_NEGATIVE; 2],
    };
    let inf = lp_solve(&infeasible, &opts).unwrap().status;
    let unb = lp_solve(&unbounded, &opts).unwrap().status;
    let pass = status_ok && worst <= 1e-8 && inf == LpStatus::Infeasible && unb == LpStatus::Unbounded;
    Verdict::new(pass, format!("max objective gap {worst:.2e} <= 1e-8, infeasible -> {inf:?}, unbounded -> {unb:?}"))
}

fn ratio_chain() -> Verdict {
    let (nodes, constants) = flagship();
    let table = ratio_experiment(&nodes, &constants, K, &[12, 16, 24, 32], &RatioOptions::default()).unwrap();
    let c = &constants;
    let mut pass = table.all_computed();
    let mut chain_all = true;
    let mut ratios = Vec::new();
    let mut parts = Vec::new();
    for row in table.computed() {
        let (n, b) = (row.n as f64, row.b_n);
        let parenthesis = 1.0 - c.m_bar.powi(4) * c.m_tilde_big * b * b * n * n / (8.0 * c.m_star);
        let lower = c.m_star * b * b / (n * n) * parenthesis;
        let chain = parenthesis <= 0.5 || row.true_error_estimate >= lower;
        chain_all &= chain && row.chain_ok;
        ratios.push(row.ratio);
        parts.push(format!("n={} E={:.3e} ratio={:.3e}", row.n, row.e_lower, row.ratio));
    }
    let monotone = ratios.windows(2).all(|w| w[1] >= 0.9 * w[0]);
    pass &= chain_all && monotone;
    Verdict::new(pass, format!("chain_ok={chain_all}, ratio non-decreasing={monotone}; {}", parts.join(", ")))
}

fn negative_control() -> Verdict {
    let out = Command::new(env!("CARGO_BIN_EXE_comono-lab"))
        .args(["verify", "--nodes", "0,-1,-2,-3", "--mode", "desk", "--N-override", "2"])
        .current_dir(std::env::temp_dir())
        .output()
        .expect("binary runs");
    let stderr = String::from_utf8_lossy(&out.stderr);
    let code = out.status.code();
    let line = stderr.lines().find(|l| l.contains("Q_r")).unwrap_or("").trim().to_string();
    Verdict::new(code == Some(1) && !line.is_empty(), format!("exit {code:?}: {line}"))
}

type Criterion = (usize, &'static str, Duration, fn() -> Verdict);

fn main() {
    let s = Duration::from_secs;
    let criteria: [Criterion; 11] = [
        (1, "kernel normalization", s(1), kernel_normalization),
        (2, "kernel approximation bound", s(5), kernel_bound),
        (3, "alpha balance", s(1), alpha_balance),
        (4, "gamma balance", s(1), gamma_balance),
        (5, "shape, norm and curvature properties", s(10), shape_norm_curvature),
        (6, "modulus bound", s(30), modulus_bound),
        (7, "Bernstein suite", s(10), bernstein_suite),
        (8, "modulus oracle", s(5), modulus_oracle),
        (9, "LP oracle", s(5), lp_oracle),
        (10, "ratio chain", s(300), ratio_chain),
        (11, "negative control", s(1), negative_control),
    ];
    let mut failed = Vec::new();
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|e| {
                let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
                Verdict::new(false, format!("panicked: {}", msg.unwrap_or_default()))
            });
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = verdict.pass && in_time;
        println!(
            "criterion {id:>2} {}: {name} [{:.2}s / {}s{}] {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" },
            verdict.detail
        );
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 11 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
