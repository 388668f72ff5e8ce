//! `ltv` command-line front end.
//!
//! Every subcommand reads a system spec, writes a JSON report carrying
//! `"schema_version": 1` plus CSV tables into `--out`, and exits with
//! 0 on success, 2 on validation errors and 3 when the verdict is
//! infeasible (the verdict report is still written). Other I/O failures
//! exit with 1. `LTV_THREADS` caps the worker pool.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::duality::{adjoint_identity_residual, exact_controllability_test, key_identity_residual};
use crate::error::{Error, Result};
use crate::gramian::{ctrl_gramian_lyapunov, ctrl_gramian_quadrature, obs_gramian, GramianResult, DEFAULT_COERCIVITY_TOL};
use crate::hautus::{
    averaging_identity_residual, eigenvector_test_vectors, frozen_vs_ltv_report, hautus_sweep, log_spaced,
    spectral_grid, HautusGrid, DEFAULT_IMAG_PARTS,
};
use crate::json::finite_or_inf;
use crate::propagate::{Integrator, Propagator, PropagatorOptions};
use crate::rng::Lcg64;
use crate::synth::{min_norm_control, null_control, SynthesisResult};
use crate::sysmodel::{parse_system, CoeffRepr, ControlSignal, LtvSystem, Quadrature, TimeGrid};

/// The JSON Schema every report validates against.
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "ltv", version, about = "Analysis and control synthesis for linear time-varying systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureArg {
    Trapezoid,
    Simpson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegratorArg {
    Rk4,
    Midpoint,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunConfig {
    /// System spec (JSON).
    #[arg(long)]
    pub system: PathBuf,
    /// Directory for reports; created if missing.
    #[arg(long, default_value = ".")]
    #[serde(skip)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = QuadratureArg::Trapezoid)]
    pub quadrature: QuadratureArg,
    #[arg(long, value_enum, default_value_t = IntegratorArg::Rk4)]
    pub integrator: IntegratorArg,
    /// Integrator steps per grid interval.
    #[arg(long, default_value_t = 4)]
    pub substeps: usize,
    /// Relative eigenvalue threshold for coercivity and range tests.
    #[arg(long, default_value_t = DEFAULT_COERCIVITY_TOL)]
    pub tol: f64,
}

impl RunConfig {
    pub fn options(&self) -> PropagatorOptions {
        PropagatorOptions {
            integrator: match self.integrator {
                IntegratorArg::Rk4 => Integrator::Rk4,
                IntegratorArg::Midpoint => Integrator::Midpoint,
            },
            substeps: self.substeps,
            quadrature: match self.quadrature {
                QuadratureArg::Trapezoid => Quadrature::Trapezoid,
                QuadratureArg::Simpson => Quadrature::Simpson,
            },
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Controllability, null-controllability and admissibility verdicts.
    Analyze(RunConfig),
    /// Controllability Gramian by quadrature and by the Lyapunov ODE, and
    /// the observability Gramian.
    Gramian(RunConfig),
    /// Minimum-energy steering control.
    Synthesize(SynthArgs),
    /// Sweep of the time-varying Hautus margin.
    Hautus(HautusArgs),
    /// Frozen-time observability constants against the time-varying one.
    FrozenCompare(FrozenArgs),
    /// Validate a system spec.
    Check(RunConfig),
    /// Built-in invariant checks on bundled reference systems.
    SelfCheck(SelfCheckArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub config: RunConfig,
    /// Initial state: comma-separated numbers, or `@file` holding a JSON array.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: String,
    /// Target state, same format as `--x0`. Defaults to the origin.
    #[arg(long, allow_hyphen_values = true)]
    pub target: Option<String>,
    /// Steer to the origin through the range-inclusion test, which also
    /// covers singular Gramians.
    #[arg(long, conflicts_with = "target")]
    pub null: bool,
}

#[derive(Debug, Args)]
pub struct HautusArgs {
    #[command(flatten)]
    pub config: RunConfig,
    #[arg(long, default_value_t = 0.1)]
    pub re_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub re_max: f64,
    /// Number of log-spaced real parts.
    #[arg(long, default_value_t = 7)]
    pub re_points: usize,
    /// Imaginary parts, comma-separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = DEFAULT_IMAG_PARTS)]
    pub im: Vec<f64>,
    /// Number of seeded random unit test vectors.
    #[arg(long, default_value_t = 50)]
    pub vectors: usize,
    /// Grid times at which eigenvectors of A(t) join the test vectors.
    #[arg(long, default_value_t = 5)]
    pub eigen_times: usize,
}

#[derive(Debug, Args)]
pub struct FrozenArgs {
    #[command(flatten)]
    pub config: RunConfig,
    /// Use every k-th grid node as a freezing time.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
}

#[derive(Debug, Args)]
pub struct SelfCheckArgs {
    /// Replace every check's tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Infeasible,
    ChecksFailed,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::ChecksFailed => 1,
            Outcome::Infeasible => 3,
        }
    }
}

/// 2 for anything rooted in bad input, 3 for infeasible verdicts, 1 for I/O.
pub fn error_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 1,
        Error::NotControllable { .. } | Error::NotNullControllable | Error::LinearSolve { .. } => 3,
        _ => 2,
    }
}

/// Caps the global rayon pool at `LTV_THREADS` when set to a positive integer.
pub fn configure_threads() {
    if let Some(n) = std::env::var("LTV_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

fn write_report<T: Serialize>(config: &RunConfig, command: &str, body: T) -> Result<()> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        config,
        body,
    };
    let mut text = serde_json::to_string_pretty(&env).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::create_dir_all(&config.out)?;
    fs::write(config.out.join(format!("{}.json", command.replace('-', "_"))), text)?;
    Ok(())
}

/// 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_csv(dir: &Path, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(header).map_err(to_io)?;
    for row in rows {
        w.write_record(&row).map_err(to_io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), bytes)?;
    Ok(())
}

fn load(config: &RunConfig) -> Result<Propagator> {
    if !(config.tol >= 0.0) {
        return Err(Error::Precondition(format!("tol must be >= 0, got {}", config.tol)));
    }
    let text = fs::read_to_string(&config.system)?;
    let sys = parse_system(&text)?;
    Propagator::new(&sys, config.options())
}

/// Parses `1,2,3` (commas or whitespace) or `@path` to a JSON array.
pub fn parse_vector(arg: &str) -> Result<Vec<f64>> {
    if let Some(path) = arg.strip_prefix('@') {
        let text = fs::read_to_string(path)?;
        return serde_json::from_str(&text).map_err(|e| Error::Malformed(format!("{path}: {e}")));
    }
    arg.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::Malformed(format!("not a number: {s:?}")))
        })
        .collect()
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Analyze(c) => analyze(c),
        Command::Gramian(c) => gramian(c),
        Command::Synthesize(a) => synthesize(a),
        Command::Hautus(a) => hautus(a),
        Command::FrozenCompare(a) => frozen_compare(a),
        Command::Check(c) => check(c),
        Command::SelfCheck(a) => {
            let rows = self_check(&reference_systems(), a.tol, a.seed);
            print!("{}", format_table(&rows));
            Ok(if rows.iter().all(|r| r.pass) {
                Outcome::Success
            } else {
                Outcome::ChecksFailed
            })
        }
    }
}

fn analyze(config: &RunConfig) -> Result<Outcome> {
    let p = load(config)?;
    let report = exact_controllability_test(&p, config.tol)?;
    let yes = |b: bool| if b { "yes" } else { "no" };
    let summary = format!(
        "controllable: {} (lambda_min(W) = {:.6e}), null-controllable: {} (c = {:.6e}), M = {:.6e}",
        yes(report.controllable),
        report.lambda_min_w,
        yes(report.null_controllable),
        report.null_inclusion_c,
        report.admissibility_m
    );
    #[derive(Serialize)]
    struct Body<'a> {
        report: &'a crate::duality::DualityReport,
        summary: &'a str,
    }
    write_report(config, "analyze", Body { report: &report, summary: &summary })?;
    println!("{summary}");
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct GramianJson {
    kind: crate::gramian::GramianKind,
    method: crate::gramian::GramianMethod,
    matrix: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
    lambda_min: f64,
    lambda_max: f64,
    cross_residual: Option<f64>,
}

impl From<&GramianResult> for GramianJson {
    fn from(g: &GramianResult) -> Self {
        Self {
            kind: g.kind,
            method: g.method,
            matrix: matrix_rows(&g.matrix),
            eigenvalues: g.eigenvalues.clone(),
            lambda_min: g.lambda_min,
            lambda_max: g.lambda_max,
            cross_residual: g.cross_residual,
        }
    }
}

fn gramian(config: &RunConfig) -> Result<Outcome> {
    let p = load(config)?;
    let mut wq = ctrl_gramian_quadrature(&p);
    let mut wl = ctrl_gramian_lyapunov(p.system(), &p.options());
    wq.cross_check(&mut wl);
    let q = obs_gramian(&p);
    let coercive = crate::gramian::coercivity_check(&wq, config.tol).coercive;

    #[derive(Serialize)]
    struct Body {
        gramians: Vec<GramianJson>,
        coercive: bool,
    }
    write_report(
        config,
        "gramian",
        Body {
            gramians: vec![(&wq).into(), (&wl).into(), (&q).into()],
            coercive,
        },
    )?;
    let rows = (0..wq.eigenvalues.len())
        .map(|k| vec![k.to_string(), num(wq.eigenvalues[k]), num(wl.eigenvalues[k]), num(q.eigenvalues[k])]);
    write_csv(
        &config.out,
        "gramian_eigenvalues.csv",
        &["index", "w_quadrature", "w_lyapunov_ode", "q_observability"],
        rows,
    )?;
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct SynthJson {
    method: &'static str,
    verdict: &'static str,
    feasible: bool,
    error: Option<String>,
    x0: Vec<f64>,
    target: Vec<f64>,
    result: Option<SynthSummary>,
}

#[derive(Serialize)]
struct SynthSummary {
    target_residual: f64,
    cost: f64,
    gramian_cost: f64,
    #[serde(serialize_with = "finite_or_inf")]
    condition: f64,
    multiplier: Vec<f64>,
}

fn synthesize(args: &SynthArgs) -> Result<Outcome> {
    let config = &args.config;
    let p = load(config)?;
    let n = p.system().n();
    let x0 = DVector::from_vec(parse_vector(&args.x0)?);
    let target = match &args.target {
        Some(t) => DVector::from_vec(parse_vector(t)?),
        None => DVector::zeros(n),
    };
    let method = if args.null { "null" } else { "min_norm" };
    let outcome = if args.null {
        null_control(&p, &x0, config.tol)
    } else {
        min_norm_control(&p, &x0, &target, config.tol)
    };
    let mut body = SynthJson {
        method,
        verdict: "ok",
        feasible: true,
        error: None,
        x0: x0.iter().copied().collect(),
        target: target.iter().copied().collect(),
        result: None,
    };
    match outcome {
        Ok(r) => {
            write_control_csv(config, &r)?;
            println!("cost {:.6e}, target residual {:.3e}", r.cost, r.target_residual);
            body.result = Some(SynthSummary {
                target_residual: r.target_residual,
                cost: r.cost,
                gramian_cost: r.gramian_cost,
                condition: r.condition,
                multiplier: r.multiplier.iter().copied().collect(),
            });
            write_report(config, "synthesize", body)?;
            Ok(Outcome::Success)
        }
        Err(e) if error_code(&e) == 3 => {
            body.verdict = match e {
                Error::NotControllable { .. } => "not_controllable",
                Error::NotNullControllable => "not_null_controllable",
                _ => "ill_conditioned",
            };
            body.feasible = false;
            body.error = Some(e.to_string());
            write_report(config, "synthesize", body)?;
            eprintln!("{e}");
            Ok(Outcome::Infeasible)
        }
        Err(e) => Err(e),
    }
}

fn write_control_csv(config: &RunConfig, r: &SynthesisResult) -> Result<()> {
    let u: &ControlSignal = &r.control;
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=u.dim()).map(|k| format!("u_{k}")))
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = u.grid().nodes().iter().zip(u.values()).map(|(&t, v)| {
        std::iter::once(num(t)).chain(v.iter().map(|&x| num(x))).collect()
    });
    write_csv(&config.out, "control.csv", &header, rows)
}

fn hautus(args: &HautusArgs) -> Result<Outcome> {
    let config = &args.config;
    if !(args.re_min > 0.0 && args.re_max >= args.re_min && args.re_points >= 1) {
        return Err(Error::Precondition(
            "need 0 < re-min <= re-max and re-points >= 1".into(),
        ));
    }
    let p = load(config)?;
    let sys = p.system();
    let lambdas = spectral_grid(&log_spaced(args.re_min, args.re_max, args.re_points), &args.im, 1.0);
    let mut rng = Lcg64::new(config.seed);
    let mut vectors: Vec<_> = (0..args.vectors).map(|_| rng.unit_complex_vector(sys.n())).collect();
    if args.eigen_times > 0 {
        let steps = p.grid().steps();
        let times: Vec<f64> = (0..args.eigen_times)
            .map(|k| {
                let idx = if args.eigen_times == 1 {
                    0
                } else {
                    (k * steps + (args.eigen_times - 1) / 2) / (args.eigen_times - 1)
                };
                p.grid().node(idx.min(steps))
            })
            .collect();
        vectors.extend(eigenvector_test_vectors(sys, &times)?);
    }
    let grid = HautusGrid::new(lambdas, vectors)?;
    let report = hautus_sweep(&p, &grid)?;

    let mut rows = Vec::new();
    for (i, l) in grid.lambdas().iter().enumerate() {
        for (j, &m) in report.margins[i].iter().enumerate() {
            rows.push(vec![num(l.re), num(l.im), j.to_string(), num(m)]);
        }
    }
    write_csv(
        &config.out,
        "hautus_margins.csv",
        &["re_lambda", "im_lambda", "vector_index", "margin"],
        rows,
    )?;
    #[derive(Serialize)]
    struct Body<'a> {
        report: &'a crate::hautus::HautusReport,
        lambda_count: usize,
        vector_count: usize,
    }
    write_report(
        config,
        "hautus",
        Body {
            report: &report,
            lambda_count: grid.lambdas().len(),
            vector_count: grid.test_vectors().len(),
        },
    )?;
    println!(
        "min margin {:.6e} (delta = {:.6e}, M = {:.6e})",
        report.min_margin, report.delta, report.admissibility_m
    );
    Ok(Outcome::Success)
}

fn frozen_compare(args: &FrozenArgs) -> Result<Outcome> {
    let config = &args.config;
    let p = load(config)?;
    let rep = frozen_vs_ltv_report(&p, args.stride)?;
    let rows = rep
        .times
        .iter()
        .zip(&rep.frozen_constants)
        .map(|(&s, &m)| vec![num(s), num(m)]);
    write_csv(&config.out, "frozen_compare.csv", &["s", "m"], rows)?;
    #[derive(Serialize)]
    struct Body {
        delta_ltv: f64,
        inf_frozen: f64,
        points: usize,
    }
    write_report(
        config,
        "frozen-compare",
        Body {
            delta_ltv: rep.delta_ltv,
            inf_frozen: rep.inf_frozen,
            points: rep.times.len(),
        },
    )?;
    println!("delta = {:.6e}, inf_s m(s) = {:.6e}", rep.delta_ltv, rep.inf_frozen);
    Ok(Outcome::Success)
}

fn check(config: &RunConfig) -> Result<Outcome> {
    #[derive(Serialize)]
    struct Body {
        valid: bool,
        error: Option<String>,
        dims: Option<[usize; 3]>,
        steps: Option<usize>,
        tau: Option<f64>,
    }
    let text = fs::read_to_string(&config.system)?;
    match parse_system(&text) {
        Ok(sys) => {
            write_report(
                config,
                "check",
                Body {
                    valid: true,
                    error: None,
                    dims: Some([sys.n(), sys.m(), sys.p()]),
                    steps: Some(sys.grid().steps()),
                    tau: Some(sys.tau()),
                },
            )?;
            println!("ok: n = {}, m = {}, p = {}", sys.n(), sys.m(), sys.p());
            Ok(Outcome::Success)
        }
        Err(e) => {
            write_report(
                config,
                "check",
                Body {
                    valid: false,
                    error: Some(e.to_string()),
                    dims: None,
                    steps: None,
                    tau: None,
                },
            )?;
            Err(e)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub system: String,
    pub check: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn reference_system(a: CoeffRepr, b: DMatrix<f64>, c: DMatrix<f64>, tau: f64) -> LtvSystem {
    LtvSystem::new(
        a,
        CoeffRepr::Constant(b),
        CoeffRepr::Constant(c),
        TimeGrid::uniform(tau, 200).expect("valid grid"),
    )
    .expect("valid reference system")
}

/// Small systems with known behaviour: constant, oscillatory and
/// time-varying generators.
pub fn reference_systems() -> Vec<(String, LtvSystem)> {
    let s = |x: f64| DMatrix::from_element(1, 1, x);
    vec![
        (
            "scalar_decay".into(),
            reference_system(CoeffRepr::Constant(s(1.0)), s(1.0), s(1.0), 1.0),
        ),
        (
            "damped_oscillator".into(),
            reference_system(
                CoeffRepr::Constant(DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.2])),
                DMatrix::from_row_slice(2, 1, &[0.0, 1.0]),
                DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
                2.0,
            ),
        ),
        (
            "ramp_scalar".into(),
            reference_system(CoeffRepr::Poly(vec![s(0.0), s(1.0)]), s(1.0), s(1.0), 1.0),
        ),
        (
            "rotating_2x2".into(),
            reference_system(
                CoeffRepr::Poly(vec![
                    DMatrix::from_row_slice(2, 2, &[0.1, 0.0, 0.0, 0.3]),
                    DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
                ]),
                DMatrix::identity(2, 2),
                DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
                1.5,
            ),
        ),
    ]
}

fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn cocycle_defect(sys: &LtvSystem) -> Result<f64> {
    let p = Propagator::with_defaults(sys)?;
    let fine = Propagator::new(sys, p.options().with_substeps(2 * p.options().substeps))?;
    let last = p.last_index();
    let mid = last / 2;
    let direct = p.transition(0, last)?;
    let split = p.transition(mid, last)? * p.transition(0, mid)?;
    Ok(rel_diff(&split, &direct).max(rel_diff(&direct, &fine.transition(0, last)?)))
}

fn random_signal(p: &Propagator, rng: &mut Lcg64) -> Result<ControlSignal> {
    let m = p.system().m();
    ControlSignal::from_fn(p.grid().clone(), |_| rng.normal_vector(m))
}

type Residual = fn(&Propagator, &ControlSignal, &DVector<f64>) -> Result<f64>;

fn duality_residual(sys: &LtvSystem, seed: u64, residual: Residual) -> Result<f64> {
    let p = Propagator::with_defaults(sys)?;
    let mut rng = Lcg64::new(seed);
    let u = random_signal(&p, &mut rng)?;
    let z = rng.normal_vector(sys.n());
    residual(&p, &u, &z)
}

fn lyapunov_gap(sys: &LtvSystem) -> Result<f64> {
    let opts = PropagatorOptions::default().with_quadrature(Quadrature::Simpson);
    let p = Propagator::new(sys, opts)?;
    let wq = ctrl_gramian_quadrature(&p);
    let wl = ctrl_gramian_lyapunov(sys, &opts);
    Ok(rel_diff(&wq.matrix, &wl.matrix))
}

/// Averaging identity for `f(t) = tr U(t,0)` on a 1000-step grid.
fn averaging_check(sys: &LtvSystem) -> Result<f64> {
    let fine = sys.with_grid(TimeGrid::uniform(sys.tau(), 1000)?)?;
    let p = Propagator::with_defaults(&fine)?;
    let f: Vec<f64> = p.transitions_from_start().iter().map(|u| u.trace()).collect();
    averaging_identity_residual(&f, sys.tau())
}

/// Runs cocycle, adjoint identity, key identity, Lyapunov-vs-quadrature and
/// averaging-identity checks on every reference system. A check whose
/// computation errors is reported as a failing row with a NaN value.
pub fn self_check(refs: &[(String, LtvSystem)], tol_override: Option<f64>, seed: u64) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    for (k, (name, sys)) in refs.iter().enumerate() {
        let mut push = |check: &'static str, value: Result<f64>, tol: f64| {
            let tolerance = tol_override.unwrap_or(tol);
            let value = value.unwrap_or(f64::NAN);
            rows.push(CheckRow {
                system: name.clone(),
                check,
                value,
                tolerance,
                pass: value <= tolerance,
            });
        };
        push("cocycle", cocycle_defect(sys), 1e-8);
        let seed = seed.wrapping_add(k as u64);
        push("adjoint_identity", duality_residual(sys, seed, adjoint_identity_residual), 1e-8);
        push("key_identity", duality_residual(sys, seed, key_identity_residual), 1e-8);
        push("lyapunov_vs_quadrature", lyapunov_gap(sys), 1e-6);
        push("averaging_identity", averaging_check(sys), 1e-5);
    }
    rows
}

pub fn format_table(rows: &[CheckRow]) -> String {
    let mut out = format!("{:<20} {:<24} {:>12} {:>10}  result\n", "system", "check", "value", "tolerance");
    for r in rows {
        out.push_str(&format!(
            "{:<20} {:<24} {:>12.3e} {:>10.1e}  {}\n",
            r.system,
            r.check,
            r.value,
            r.tolerance,
            if r.pass { "pass" } else { "FAIL" }
        ));
    }
    out
}
