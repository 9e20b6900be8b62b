//! Command-line front end.

use std::ffi::OsString;
use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::construction::{
    build_counterexample, compute_constants, normalize_nodes, verify_properties, BuildOptions, ConstantsOptions,
    ConstructionConstants, Mode, NodeSet, TroughShape,
};
use crate::error::{Error, Result};
use crate::jackson::{kernel_approx_bound_check, JacksonKernel};
use crate::shapeapprox::{
    best_comonotone, best_unconstrained, ratio_experiment, ApproxGrids, MonotonicityPattern, RatioOptions,
};
use crate::trig::TrigPoly;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CAP: i32 = 3;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "COMONO_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "comono-lab", version, about = "Comonotone approximation counterexample laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Construction constants for a node set.
    Constants(ConstantsArgs),
    /// Build the counterexample and check every property numerically.
    Verify(VerifyArgs),
    /// Comonotone approximation error against the modulus of smoothness.
    Ratio(RatioArgs),
    /// Best approximation of a target, with or without shape constraints.
    Approx(ApproxArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Faithful,
    Desk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TroughArg {
    PwLinear,
    C4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct NodeArgs {
    /// Comma-separated nodes (`pi`, `-3pi/4`, `0.5`, `1/3`) or the preset `flagship`.
    #[arg(long, default_value = "flagship", allow_hyphen_values = true)]
    pub nodes: String,
    #[arg(long, value_enum, default_value = "faithful")]
    pub mode: ModeArg,
    /// Kernel parameter used in desk mode.
    #[arg(long = "N-override", alias = "n-override")]
    pub n_override: Option<usize>,
    /// Largest kernel parameter accepted in faithful mode.
    #[arg(long, default_value_t = 100_000)]
    pub n_cap: u64,
}

#[derive(Debug, Clone, Args)]
pub struct BuildArgs {
    /// Smoothness order, must exceed 3.
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "pw-linear")]
    pub trough_shape: TroughArg,
    /// Absolute tolerance of each cumulative integral table.
    #[arg(long, default_value_t = 1e-11)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ConstantsArgs {
    #[command(flatten)]
    pub nodes: NodeArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub nodes: NodeArgs,
    #[command(flatten)]
    pub build: BuildArgs,
    /// Degree selecting `b = n^(-k/3)`.
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RatioArgs {
    #[command(flatten)]
    pub nodes: NodeArgs,
    #[command(flatten)]
    pub build: BuildArgs,
    /// Comma-separated degrees.
    #[arg(long, default_value = "12,16,24,32")]
    pub n_list: String,
    /// LP grids use `grid_mult (n + 1)` points.
    #[arg(long, default_value_t = 8)]
    pub grid_mult: usize,
    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ApproxArgs {
    #[command(flatten)]
    pub nodes: NodeArgs,
    #[command(flatten)]
    pub build: BuildArgs,
    /// `g` (the counterexample), `neg-cos`, `cos:<m>`, or `poly:<file>` with a polynomial in JSON.
    #[arg(long, default_value = "g")]
    pub target: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub constrained: bool,
    #[arg(long, default_value_t = 8)]
    pub grid_mult: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV of `x, f(x), tau(x)` samples; defaults to a sibling of `--out`.
    #[arg(long)]
    pub samples: Option<PathBuf>,
}

/// Parses one node token: a decimal, a fraction `p/q`, or a rational
/// multiple of pi such as `pi`, `-pi/2` or `3pi/4`.
pub fn parse_node(token: &str) -> Result<f64> {
    let bad = || Error::InvalidConfig(format!("cannot parse node `{token}`"));
    let t = token.trim();
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t.strip_prefix('+').unwrap_or(t)),
    };
    let (num, den) = match body.split_once('/') {
        Some((a, b)) => (a.trim(), Some(b.trim())),
        None => (body, None),
    };
    let den = match den {
        Some(d) => d.parse::<f64>().map_err(|_| bad())?,
        None => 1.0,
    };
    if den == 0.0 {
        return Err(bad());
    }
    let value = if let Some(coef) = num.strip_suffix("pi") {
        let c = if coef.is_empty() { 1.0 } else { coef.trim_end_matches('*').parse::<f64>().map_err(|_| bad())? };
        c * PI / den
    } else {
        num.parse::<f64>().map_err(|_| bad())? / den
    };
    if value.is_finite() {
        Ok(sign * value)
    } else {
        Err(bad())
    }
}

pub fn parse_nodes(spec: &str) -> Result<Vec<f64>> {
    match spec.trim() {
        "flagship" => Ok(vec![0.0, -PI]),
        s => s.split(',').map(parse_node).collect(),
    }
}

fn parse_degrees(spec: &str) -> Result<Vec<usize>> {
    spec.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| Error::InvalidConfig(format!("cannot parse degree `{t}`")))
        })
        .collect()
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidNodes(_) | Error::InvalidConfig(_) | Error::GridTooSmall { .. } => EXIT_CONFIG,
        Error::KernelCap { .. } => EXIT_CAP,
        _ => EXIT_FAILURE,
    }
}

fn timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn io_error(path: &Path, e: io::Error) -> Error {
    Error::InvalidConfig(format!("cannot write {}: {e}", path.display()))
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(p) => {
            let mut f = File::create(p).map_err(|e| io_error(p, e))?;
            f.write_all(body.as_bytes()).map_err(|e| io_error(p, e))
        }
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut body = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    body.push('\n');
    emit(out, &body)
}

struct Setup {
    raw: Vec<f64>,
    nodes: NodeSet,
    constants: ConstructionConstants,
}

fn setup(args: &NodeArgs) -> Result<Setup> {
    let raw = parse_nodes(&args.nodes)?;
    let nodes = normalize_nodes(&raw)?;
    let opts = match args.mode {
        ModeArg::Faithful => ConstantsOptions { mode: Mode::Faithful, n_override: None, n_cap: args.n_cap },
        ModeArg::Desk => match args.n_override {
            Some(n) => ConstantsOptions { mode: Mode::Desk, n_override: Some(n), n_cap: args.n_cap },
            None => return Err(Error::InvalidConfig("desk mode requires --N-override".into())),
        },
    };
    let constants = compute_constants(&nodes, &opts)?;
    Ok(Setup { raw, nodes, constants })
}

fn build_options(args: &BuildArgs) -> Result<BuildOptions> {
    if args.k <= 3 {
        return Err(Error::InvalidConfig(format!("k must exceed 3, got {}", args.k)));
    }
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Err(Error::InvalidConfig(format!("tolerance must be positive, got {}", args.tol)));
    }
    let shape = match args.trough_shape {
        TroughArg::PwLinear => TroughShape::PiecewiseLinear,
        TroughArg::C4 => TroughShape::C4,
    };
    Ok(BuildOptions { shape, tol: args.tol, table_points: None })
}

fn nodes_json(s: &Setup) -> Value {
    json!({
        "input": s.raw,
        "labelled": s.nodes.labelled(),
        "shift": s.nodes.shift(),
        "i_star": s.nodes.i_star(),
        "relabelled": s.nodes.relabelled(),
    })
}

fn cmd_constants(args: &ConstantsArgs) -> Result<i32> {
    let s = setup(&args.nodes)?;
    let report = json!({
        "generated_unix": timestamp(),
        "nodes": nodes_json(&s),
        "constants": s.constants,
    });
    emit_json(args.out.as_deref(), &report)?;
    Ok(EXIT_OK)
}

fn kernel_checks(kernel: &JacksonKernel) -> Value {
    let residual = kernel.normalization_residual();
    let grid: Vec<f64> = (0..256).map(|j| -PI + 2.0 * PI * j as f64 / 256.0).collect();
    let bound = kernel_approx_bound_check(f64::sin, 1.0, kernel, &grid, kernel.quadrature_points(1));
    json!({
        "normalization_residual": residual,
        "normalization_pass": residual <= 1e-10,
        "approximation_bound": bound,
    })
}

fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    let s = setup(&args.nodes)?;
    let opts = build_options(&args.build)?;
    let kernel = kernel_checks(&s.constants.kernel());
    let kernel_pass = kernel["normalization_pass"].as_bool() == Some(true)
        && kernel["approximation_bound"]["pass"].as_bool() == Some(true);
    let mut report = json!({
        "generated_unix": timestamp(),
        "nodes": nodes_json(&s),
        "k": args.build.k,
        "n": args.n,
        "constants": s.constants,
        "kernel": kernel,
    });
    let cf = match build_counterexample(&s.nodes, &s.constants, args.build.k, args.n, &opts) {
        Ok(cf) => cf,
        Err(e @ (Error::AlphaSign { .. } | Error::GammaSign { .. })) => {
            report["failure"] = json!({ "message": e.to_string(), "detail": sign_detail(&e) });
            report["all_pass"] = json!(false);
            emit_json(args.out.as_deref(), &report)?;
            eprintln!("error: {e}");
            return Ok(EXIT_FAILURE);
        }
        Err(e) => return Err(e),
    };
    let props = verify_properties(&cf)?;
    let all_pass = props.all_pass && kernel_pass && s.constants.all_asserted_hold();
    for f in props.failures() {
        eprintln!("failed: {} {}: measured {:e}, bound {:e}", f.id, f.description, f.measured, f.bound);
    }
    report["b"] = json!({ "value": cf.b(), "raw": cf.b_raw(), "clamped": cf.clamped() });
    report["alpha"] = json!(cf.alpha());
    report["gamma"] = json!(cf.gamma());
    report["chain_flags"] = json!(cf.chain_flags());
    report["properties"] = json!(props);
    report["all_pass"] = json!(all_pass);
    emit_json(args.out.as_deref(), &report)?;
    Ok(if all_pass { EXIT_OK } else { EXIT_FAILURE })
}

fn sign_detail(e: &Error) -> Value {
    match *e {
        Error::AlphaSign { q_right, q_left } => json!({ "check": "alpha", "q_right": q_right, "q_left": q_left }),
        Error::GammaSign { i_right, i_left } => json!({ "check": "gamma", "i_right": i_right, "i_left": i_left }),
        _ => Value::Null,
    }
}

fn cmd_ratio(args: &RatioArgs) -> Result<i32> {
    let s = setup(&args.nodes)?;
    let build = build_options(&args.build)?;
    let n_list = parse_degrees(&args.n_list)?;
    let options = RatioOptions { build, grid_mult: args.grid_mult, ..RatioOptions::default() };
    let table = ratio_experiment(&s.nodes, &s.constants, args.build.k, &n_list, &options)?;
    for r in &table.rows {
        if let Some(e) = &r.error {
            eprintln!("row n = {}: {e}", r.n);
        } else if let Some(row) = &r.row {
            if row.degree_warning {
                eprintln!("warning: n = {} does not exceed s + 2N - 1", row.n);
            }
        }
    }
    match args.format {
        FormatArg::Csv => {
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            emit(args.out.as_deref(), &String::from_utf8_lossy(&buf))?;
        }
        FormatArg::Json => {
            let report = json!({
                "generated_unix": timestamp(),
                "nodes": nodes_json(&s),
                "constants": s.constants,
                "grid_mult": args.grid_mult,
                "ratio_non_decreasing": table.ratio_non_decreasing(0.10),
                "table": table,
            });
            emit_json(args.out.as_deref(), &report)?;
        }
    }
    Ok(if table.all_computed() { EXIT_OK } else { EXIT_FAILURE })
}

fn samples_path(args: &ApproxArgs) -> Option<PathBuf> {
    args.samples.clone().or_else(|| {
        args.out.as_ref().map(|p| {
            let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            p.with_file_name(format!("{stem}_samples.csv"))
        })
    })
}

fn cmd_approx(args: &ApproxArgs) -> Result<i32> {
    let raw = parse_nodes(&args.nodes.nodes)?;
    let nodes = normalize_nodes(&raw)?;
    let grid_pattern;
    let target: Box<dyn Fn(f64) -> f64 + Sync> = match args.target.as_str() {
        "g" => {
            let s = setup(&args.nodes)?;
            let build = build_options(&args.build)?;
            let cf = build_counterexample(&s.nodes, &s.constants, args.build.k, args.n, &build)?;
            // the counterexample lives in the normalised frame
            grid_pattern = MonotonicityPattern::from_nodes(&nodes);
            Box::new(move |x| cf.eval_g(x))
        }
        "neg-cos" => {
            grid_pattern = MonotonicityPattern::from_nodes_original(&nodes);
            Box::new(|x: f64| -x.cos())
        }
        t => {
            grid_pattern = MonotonicityPattern::from_nodes_original(&nodes);
            if let Some(m) = t.strip_prefix("cos:") {
                let m: f64 = m.parse().map_err(|_| Error::InvalidConfig(format!("bad harmonic in `{t}`")))?;
                Box::new(move |x: f64| (m * x).cos())
            } else if let Some(path) = t.strip_prefix("poly:") {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::InvalidConfig(format!("cannot read {path}: {e}")))?;
                let p: TrigPoly = serde_json::from_str(&text)
                    .map_err(|e| Error::InvalidConfig(format!("bad polynomial in {path}: {e}")))?;
                Box::new(move |x| p.eval(x))
            } else {
                return Err(Error::InvalidConfig(format!("unknown target `{t}`")));
            }
        }
    };
    let pattern = args.constrained.then_some(&grid_pattern);
    let grids = ApproxGrids::standard(args.n, pattern, args.grid_mult)?;
    let result = match pattern {
        Some(p) => best_comonotone(&target, args.n, p, &grids)?,
        None => best_unconstrained(&target, args.n, &grids)?,
    };
    let report = json!({
        "generated_unix": timestamp(),
        "target": args.target,
        "nodes": raw,
        "n": args.n,
        "constrained": args.constrained,
        "grid_mult": args.grid_mult,
        "pattern": pattern,
        "result": result,
    });
    emit_json(args.out.as_deref(), &report)?;
    if let Some(path) = samples_path(args) {
        let file = File::create(&path).map_err(|e| io_error(&path, e))?;
        let mut w = csv::Writer::from_writer(file);
        let csv_err = |e: csv::Error| Error::InvalidConfig(format!("cannot write {}: {e}", path.display()));
        w.write_record(["x", "f", "tau"]).map_err(csv_err)?;
        for &x in &grids.fine_error {
            w.write_record([format!("{x:.16e}"), format!("{:.16e}", target(x)), format!("{:.16e}", result.poly.eval(x))])
                .map_err(csv_err)?;
        }
        w.flush().map_err(|e| io_error(&path, e))?;
    }
    Ok(EXIT_OK)
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidConfig(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        // a second initialisation in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = configure_threads().and_then(|()| match &cli.command {
        Command::Constants(a) => cmd_constants(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Ratio(a) => cmd_ratio(a),
        Command::Approx(a) => cmd_approx(a),
    });
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_tokens() {
        assert_eq!(parse_node("pi").unwrap(), PI);
        assert_eq!(parse_node("-pi").unwrap(), -PI);
        assert_eq!(parse_node("-3pi/4").unwrap(), -3.0 * PI / 4.0);
        assert_eq!(parse_node("pi/2").unwrap(), PI / 2.0);
        assert_eq!(parse_node("0.25").unwrap(), 0.25);
        assert_eq!(parse_node("1/4").unwrap(), 0.25);
        assert!(parse_node("tau").is_err());
        assert!(parse_node("1/0").is_err());
        assert_eq!(parse_nodes("flagship").unwrap(), vec![0.0, -PI]);
        assert_eq!(parse_nodes("0,-pi").unwrap(), vec![0.0, -PI]);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::InvalidNodes("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::KernelCap { required: 5, cap: 1 }), EXIT_CAP);
        assert_eq!(exit_code(&Error::AlphaSign { q_right: 1.0, q_left: 1.0 }), EXIT_FAILURE);
    }

    #[test]
    fn desk_mode_needs_override() {
        assert_eq!(run(["comono-lab", "constants", "--mode", "desk"]), EXIT_CONFIG);
        assert_eq!(run(["comono-lab", "constants", "--nodes", "0,0"]), EXIT_CONFIG);
        assert_eq!(run(["comono-lab", "bogus"]), EXIT_CONFIG);
    }
}
