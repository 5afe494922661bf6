//! The `kobpath` command line: JSON specs in, `report.json` plus CSV out.
//!
//! Exit codes: 0 success, 1 a property verdict failed, 2 bad input or
//! configuration, 3 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path as FsPath, PathBuf};

use clap::{Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use kobpath::acceptance::{run_suite, SuiteConfig, SUITE_SEED};
use kobpath::cvec::{self, CVec};
use kobpath::metric::DEFAULT_ROYDEN_SEED;
use kobpath::properties::{
    almost_geodesic_to_chord_arc_params, chord_arc_to_almost_geodesic, default_tol, verify_almost_geodesic,
    verify_chord_arc_with_table, verify_corollary_b, CorollaryConfig, DEFAULT_N_GRID,
};
use kobpath::reparam::{arc_length, sigma_csv, unit_speed_reparametrize};
use kobpath::{
    distance_via_path_optimization, metric::royden_lower_bound_seeded, Domain, Error, GeodesicParams, OptConfig, Path,
    QuadConfig, ReparamConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "kobpath", version, about = "Unit-speed reparametrisation under the Kobayashi metric")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Infinitesimal metric k(z; v). Input: {"domain", "z", "v"}.
    Metric,
    /// Closed-form distance K(z, w), optionally with the path-optimization
    /// estimate. Input: {"domain", "z", "w", "optimize"?}.
    Distance,
    /// Unit-speed reparametrisation of a path spec; writes sigma.csv.
    Reparam,
    /// Checks the (λ, κ)-almost-geodesic inequalities; writes slack.csv.
    VerifyAg,
    /// Checks the (λ, κ)-chord-arc inequality; writes slack.csv.
    VerifyCa,
    /// Chord-arc curve → almost-geodesic σ with the same (λ, κ).
    CorollaryA,
    /// (λ, κ)-almost-geodesic → (λ², λ²κ)-chord-arc.
    CorollaryB,
    /// Sampled Royden lower bound. Input: {"domain", "x", "radius", "n_points", "n_dirs"}.
    Royden,
    /// Runs the built-in acceptance suite.
    Demo,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Options {
    /// JSON input file.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Adaptive quadrature tolerance per segment [default: 1e-8].
    #[arg(long, global = true)]
    pub quad_tol: Option<f64>,
    /// Speed threshold of the zero-speed set [default: 1e-12].
    #[arg(long, global = true)]
    pub eps_speed: Option<f64>,
    /// Inversion tolerance of G [default: 1e-10·(1 + ℓ)].
    #[arg(long, global = true)]
    pub eps_inv: Option<f64>,
    /// Verdict tolerance on the worst slack [default: 1e-6·(1 + ℓ)].
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Grid points of the property checks [default: 64].
    #[arg(long, global = true)]
    pub n_grid: Option<usize>,
    /// Approximate number of samples of σ [default: 1024].
    #[arg(long, global = true)]
    pub n_out: Option<usize>,
    #[arg(long, global = true, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, global = true, default_value_t = 0.0)]
    pub kappa: f64,
    /// Seed of the sampled computations (royden, demo).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Replaces the built-in plateau spec of the demo (test fixture).
    #[arg(long, global = true, hide = true)]
    pub demo_plateau_spec: Option<PathBuf>,
}

/// Failure of one CLI run, with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::QuadratureNonConvergence { .. }
            | Error::InversionFailed { .. }
            | Error::NoFeasiblePath
            | Error::DegenerateResult { .. } => EXIT_NUMERICAL,
            Error::HypothesisViolated(_) => EXIT_FAIL,
            _ => EXIT_INPUT,
        };
        Failure { code, message: err.to_string() }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match configure_threads().and_then(|()| execute(&cli)) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("kobpath: {}", f.message);
            f.code
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("KOBPATH_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::input(format!("KOBPATH_THREADS = {raw:?} is not a positive integer")))?;
    // A pool configured earlier in the same process is kept.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli) -> Result<i32, Failure> {
    let opts = &cli.opts;
    match cli.command {
        Command::Metric => metric(opts),
        Command::Distance => distance(opts),
        Command::Reparam => reparam(opts),
        Command::VerifyAg | Command::VerifyCa => verify(opts, cli.command),
        Command::CorollaryA => corollary_a(opts),
        Command::CorollaryB => corollary_b(opts),
        Command::Royden => royden(opts),
        Command::Demo => demo(opts),
    }
}

fn read_input(opts: &Options) -> Result<String, Failure> {
    let path = opts.input.as_ref().ok_or_else(|| Failure::input("this command needs --input <file>"))?;
    fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::input(format!("malformed input: {e}")))
}

fn read_path(opts: &Options) -> Result<Path, Failure> {
    Ok(Path::from_json(&read_input(opts)?)?)
}

fn quad_config(opts: &Options) -> Result<QuadConfig, Failure> {
    let quad = opts.quad_tol.map(QuadConfig::with_tol).unwrap_or_default();
    quad.validate()?;
    Ok(quad)
}

fn reparam_config(opts: &Options) -> Result<ReparamConfig, Failure> {
    let mut cfg = ReparamConfig { quad: quad_config(opts)?, eps_inv: opts.eps_inv, ..ReparamConfig::default() };
    if let Some(e) = opts.eps_speed {
        cfg.eps_speed = e;
    }
    if let Some(n) = opts.n_out {
        cfg.n_out = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn params(opts: &Options) -> Result<GeodesicParams, Failure> {
    Ok(GeodesicParams::new(opts.lambda, opts.kappa)?)
}

fn n_grid(opts: &Options) -> usize {
    opts.n_grid.unwrap_or(DEFAULT_N_GRID)
}

/// Writes `contents` to `dir/name` through a temporary file and a rename.
fn write_atomic(dir: &FsPath, name: &str, contents: &str) -> Result<(), Failure> {
    let fail = |e: std::io::Error| Failure::input(format!("cannot write {}: {e}", dir.join(name).display()));
    fs::create_dir_all(dir).map_err(fail)?;
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents).map_err(fail)?;
    fs::rename(&tmp, dir.join(name)).map_err(fail)
}

fn write_report(opts: &Options, report: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(report).expect("reports are plain JSON values");
    text.push('\n');
    write_atomic(&opts.out, "report.json", &text)
}

fn verdict_code(passed: bool) -> i32 {
    if passed {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricInput {
    domain: Domain,
    #[serde(with = "cvec::pairs")]
    z: CVec,
    #[serde(with = "cvec::pairs")]
    v: CVec,
}

fn metric(opts: &Options) -> Result<i32, Failure> {
    let input: MetricInput = parse(&read_input(opts)?)?;
    let k = input.domain.infinitesimal_metric(&input.z, &input.v)?;
    println!("{k}");
    write_report(opts, &json!({ "command": "metric", "domain": input.domain, "metric": k }))?;
    Ok(EXIT_OK)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DistanceInput {
    domain: Domain,
    #[serde(with = "cvec::pairs")]
    z: CVec,
    #[serde(with = "cvec::pairs")]
    w: CVec,
    #[serde(default)]
    optimize: bool,
}

fn distance(opts: &Options) -> Result<i32, Failure> {
    let input: DistanceInput = parse(&read_input(opts)?)?;
    let k = input.domain.distance(&input.z, &input.w)?;
    println!("{k}");
    let optimized = if input.optimize {
        let estimate = distance_via_path_optimization(&input.domain, &input.z, &input.w, &OptConfig::default())?;
        println!("path optimization: {estimate}");
        Some(estimate)
    } else {
        None
    };
    let report = json!({
        "command": "distance",
        "domain": input.domain,
        "distance": k,
        "path_optimization": optimized,
    });
    write_report(opts, &report)?;
    Ok(EXIT_OK)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RoydenInput {
    domain: Domain,
    #[serde(with = "cvec::pairs")]
    x: CVec,
    radius: f64,
    n_points: usize,
    n_dirs: usize,
}

fn royden(opts: &Options) -> Result<i32, Failure> {
    let input: RoydenInput = parse(&read_input(opts)?)?;
    let seed = opts.seed.unwrap_or(DEFAULT_ROYDEN_SEED);
    let c = royden_lower_bound_seeded(&input.domain, &input.x, input.radius, input.n_points, input.n_dirs, seed)?;
    println!("{c}");
    let report = json!({
        "command": "royden",
        "domain": input.domain,
        "radius": input.radius,
        "n_points": input.n_points,
        "n_dirs": input.n_dirs,
        "seed": seed,
        "lower_bound": c,
    });
    write_report(opts, &report)?;
    Ok(EXIT_OK)
}

fn reparam(opts: &Options) -> Result<i32, Failure> {
    let path = read_path(opts)?;
    let cfg = reparam_config(opts)?;
    let result = unit_speed_reparametrize(&path, &cfg)?;
    println!(
        "length {} (collapsed = {}), |speed − 1| ≤ {} at {:.4} of interior nodes",
        result.length(),
        result.collapsed,
        cfg.speed_tol,
        result.diagnostics.fraction_unit_speed
    );
    write_atomic(&opts.out, "sigma.csv", &sigma_csv(&result.sigma)?)?;
    let report = json!({
        "command": "reparam",
        "config": cfg,
        "length": result.length(),
        "collapsed": result.collapsed,
        "result": result,
    });
    write_report(opts, &report)?;
    Ok(EXIT_OK)
}

fn verify(opts: &Options, command: Command) -> Result<i32, Failure> {
    let path = read_path(opts)?;
    let params = params(opts)?;
    let quad = quad_config(opts)?;
    let table = arc_length(&path, &quad)?;
    let tol = opts.tol.unwrap_or_else(|| default_tol(table.total));
    let n = n_grid(opts);
    let (name, report) = match command {
        Command::VerifyAg => ("verify-ag", verify_almost_geodesic(&path, params, n, tol)?),
        _ => ("verify-ca", verify_chord_arc_with_table(&path, &table, params, n, tol)?),
    };
    println!(
        "{}: worst slack {:e} at ({}, {})",
        if report.passed() { "pass" } else { "fail" },
        report.worst_slack,
        report.witness.0,
        report.witness.1
    );
    write_atomic(&opts.out, "slack.csv", &report.to_csv())?;
    let json = json!({
        "command": name,
        "length": table.total,
        "quad": quad,
        "report": report,
    });
    write_report(opts, &json)?;
    Ok(verdict_code(report.passed()))
}

fn corollary_a(opts: &Options) -> Result<i32, Failure> {
    let path = read_path(opts)?;
    let params = params(opts)?;
    let cfg = CorollaryConfig { reparam: reparam_config(opts)?, n_grid: n_grid(opts), tol: opts.tol };
    let (result, chord_arc, almost_geodesic) = chord_arc_to_almost_geodesic(&path, params, &cfg)?;
    let passed = chord_arc.passed() && almost_geodesic.passed();
    println!(
        "{}: sigma chord-arc slack {:e}, almost-geodesic slack {:e}",
        if passed { "pass" } else { "fail" },
        chord_arc.worst_slack,
        almost_geodesic.worst_slack
    );
    write_atomic(&opts.out, "sigma.csv", &sigma_csv(&result.sigma)?)?;
    write_atomic(&opts.out, "slack.csv", &almost_geodesic.to_csv())?;
    let report = json!({
        "command": "corollary-a",
        "config": cfg,
        "length": result.length(),
        "collapsed": result.collapsed,
        "chord_arc": chord_arc,
        "almost_geodesic": almost_geodesic,
    });
    write_report(opts, &report)?;
    Ok(verdict_code(passed))
}

fn corollary_b(opts: &Options) -> Result<i32, Failure> {
    let path = read_path(opts)?;
    let params = params(opts)?;
    let quad = quad_config(opts)?;
    let length = arc_length(&path, &quad)?.total;
    let tol = opts.tol.unwrap_or_else(|| default_tol(length));
    let report = verify_corollary_b(&path, params, n_grid(opts), tol)?;
    println!(
        "{}: ({}, {})-chord-arc worst slack {:e}",
        if report.passed() { "pass" } else { "fail" },
        report.params.lambda,
        report.params.kappa,
        report.worst_slack
    );
    write_atomic(&opts.out, "slack.csv", &report.to_csv())?;
    let json = json!({
        "command": "corollary-b",
        "length": length,
        "almost_geodesic_params": params,
        "chord_arc_params": almost_geodesic_to_chord_arc_params(params),
        "report": report,
    });
    write_report(opts, &json)?;
    Ok(verdict_code(report.passed()))
}

fn demo(opts: &Options) -> Result<i32, Failure> {
    let mut cfg = SuiteConfig { quad_tol: opts.quad_tol, seed: opts.seed.unwrap_or(SUITE_SEED), ..SuiteConfig::default() };
    if let Some(p) = &opts.demo_plateau_spec {
        cfg.plateau_spec = fs::read_to_string(p).map_err(|e| Failure::input(format!("cannot read {}: {e}", p.display())))?;
    }
    let outcomes = run_suite(&cfg)?;
    for o in &outcomes {
        println!("{}", o.line());
    }
    let passed = outcomes.iter().all(|o| o.passed);
    println!("{} of {} criteria passed", outcomes.iter().filter(|o| o.passed).count(), outcomes.len());
    let report = json!({
        "command": "demo",
        "seed": cfg.seed,
        "quad_tol": cfg.quad_tol,
        "passed": passed,
        "criteria": outcomes,
    });
    write_report(opts, &report)?;
    Ok(verdict_code(passed))
}
