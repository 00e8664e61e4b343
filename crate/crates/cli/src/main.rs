//! `ccst`: verification, transform evaluation and tabulation.
//!
//! Exit status: 0 on success, 1 when a numerical check fails, 2 on invalid
//! input or configuration.

mod config;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use ccst::cst::{
    cst_forward, cst_inverse, inverse_log_multiplier, ml2_norm, verify_unitarity, MeasureParams, VerifyConfig,
};
use ccst::gegenbauer::{kernel_bound_log, KernelSide};
use ccst::kernels::{czminus, czplus, truncation_term_log, KernelTruncation, DEFAULT_TOLERANCE, DEFAULT_WINDOW};
use ccst::output::{format_f64, to_json};
use ccst::polynomial::TermRecord;
use ccst::sphere::build_quadrature;
use ccst::{Multivector64, MvPolynomial64, SphereFunction64, Vector64};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use config::{CommonArgs, Format, RunConfig};

/// Environment variable holding the worker thread count.
const THREADS_VAR: &str = "CCST_THREADS";

#[derive(Debug)]
pub enum Failure {
    /// A numerical check did not pass (exit 1).
    Check(String),
    /// Bad flags, config or input (exit 2).
    Usage(String),
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Check(m) | Failure::Usage(m) => f.write_str(m),
        }
    }
}

impl From<ccst::Error> for Failure {
    fn from(e: ccst::Error) -> Self {
        match e {
            ccst::Error::AmplificationExceeded { .. } => Failure::Check(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("i/o error: {e}"))
    }
}

#[derive(Parser, Debug)]
#[command(name = "ccst", version, about = "Clifford coherent state transforms on spheres")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check unitarity, monogenicity and roundtrip on seeded random inputs.
    Verify(VerifyArgs),
    /// Tabulate the radial density over a grid in y = log r.
    Density(DensityArgs),
    /// Tabulate heat multipliers, kernel bounds and truncation per degree.
    KernelTable(KernelTableArgs),
    /// Apply the transform to sphere data read from a JSON file.
    Transform(TransformArgs),
    /// Time a verification run.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct DensityArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value_t = -4.0, allow_negative_numbers = true)]
    y_min: f64,
    #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
    y_max: f64,
    /// Number of grid points
    #[arg(long, default_value_t = 161)]
    y_steps: usize,
    /// Extra column `rho(y) e^{a y}` for each exponent `a`
    #[arg(long = "moment", allow_negative_numbers = true)]
    moments: Vec<f64>,
}

#[derive(Args, Debug)]
struct KernelTableArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Highest degree tabulated
    #[arg(long, default_value_t = 20)]
    max_k: usize,
    /// Truncation tolerance deciding the retained flag
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    kernel_tol: f64,
    #[arg(long, default_value_t = DEFAULT_WINDOW.0)]
    r_min: f64,
    #[arg(long, default_value_t = DEFAULT_WINDOW.1)]
    r_max: f64,
    /// First unit vector of the sampled kernel pair, comma separated [default: e1]
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<String>,
    /// Second unit vector of the sampled kernel pair [default: e2]
    #[arg(long, allow_hyphen_values = true)]
    xi: Option<String>,
}

#[derive(Args, Debug)]
struct TransformArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// JSON file holding sphere values or a polynomial
    #[arg(long)]
    input: std::path::PathBuf,
    /// Also apply the inverse and report the roundtrip error
    #[arg(long)]
    inverse: bool,
    /// Radii of the evaluation grid, comma separated
    #[arg(long)]
    radii: Option<String>,
    /// Directions of the evaluation grid, `;`-separated vectors [default: e1..e_{m+1}]
    #[arg(long, allow_hyphen_values = true)]
    directions: Option<String>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    common: CommonArgs,
}

fn parse_list(name: &str, raw: &str) -> Result<Vec<f64>, Failure> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Failure::Usage(format!("invalid `{name}` entry {s:?}: {e}")))
        })
        .collect()
}

fn parse_unit(name: &str, raw: &str, dim: usize) -> Result<Vector64, Failure> {
    let v = parse_list(name, raw)?;
    if v.len() != dim {
        return Err(Failure::Usage(format!("`{name}` needs {dim} components, got {}", v.len())));
    }
    let v = Vector64::new(v);
    let n = v.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Failure::Usage(format!("`{name}` must be a nonzero vector")));
    }
    Ok(v.scale(1.0 / n))
}

/// Writes to `path` through a temporary file in the same directory, or to stdout.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
        Some(path) => {
            let dir = path
                .parent()
                .filter(|d| !d.as_os_str().is_empty())
                .unwrap_or(Path::new("."));
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(bytes)?;
            tmp.flush()?;
            tmp.persist(path).map_err(|e| Failure::from(e.error))?;
        }
    }
    Ok(())
}

fn csv_text(header: &[String], rows: &[Vec<String>]) -> Result<String, Failure> {
    let fail = |e: csv::Error| Failure::Usage(format!("csv output: {e}"));
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(header).map_err(fail)?;
    for row in rows {
        wtr.write_record(row).map_err(fail)?;
    }
    let bytes = wtr.into_inner().map_err(|e| Failure::Usage(format!("csv output: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv of UTF-8 fields"))
}

fn verify_config(cfg: &RunConfig) -> Result<VerifyConfig, Failure> {
    let mut vc = VerifyConfig::new(cfg.m, cfg.t, cfg.band_limit, cfg.trials, cfg.seed);
    vc.quadrature_degree = cfg.degree;
    vc.tolerances = cfg.tolerances;
    vc.validate()?;
    Ok(vc)
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let cfg = RunConfig::resolve(&args.common)?;
    let report = verify_unitarity(&verify_config(&cfg)?)?;
    let bytes = match cfg.format_or(Format::Json) {
        Format::Json => report.to_json()?.into_bytes(),
        Format::Csv => {
            let mut buf = Vec::new();
            report.write_modes_csv(&mut buf)?;
            buf
        }
    };
    emit(cfg.out.as_deref(), &bytes)?;
    if report.pass {
        eprintln!(
            "verify: pass (m = {}, t = {}, K = {}, max isometry error {:.3e})",
            cfg.m,
            cfg.t,
            cfg.band_limit,
            report.max_isometry_error()
        );
        Ok(())
    } else {
        let failed = report.trials.iter().filter(|t| !t.pass).count();
        let bad_constraints = report.constraints.iter().filter(|c| !c.pass).count();
        Err(Failure::Check(format!(
            "verify: FAIL ({failed} of {} trials, {bad_constraints} moment identities)",
            report.trials.len()
        )))
    }
}

#[derive(Serialize)]
struct DensityRow {
    y: f64,
    rho: f64,
    weighted: Vec<f64>,
}

#[derive(Serialize)]
struct MomentCheck {
    a: f64,
    riemann_log: f64,
    analytic_log: f64,
}

#[derive(Serialize)]
struct DensityTable {
    m: usize,
    t: f64,
    step: f64,
    rows: Vec<DensityRow>,
    moments: Vec<MomentCheck>,
}

fn cmd_density(args: &DensityArgs) -> Result<(), Failure> {
    let cfg = RunConfig::resolve(&args.common)?;
    let params = MeasureParams::new(cfg.m, cfg.t)?;
    if args.y_steps == 0 {
        return Err(Failure::Usage("empty y grid: `y-steps` must be at least 1".into()));
    }
    if !(args.y_min <= args.y_max) || !args.y_min.is_finite() || !args.y_max.is_finite() {
        return Err(Failure::Usage(format!(
            "empty y grid: need finite y-min <= y-max, got [{}, {}]",
            args.y_min, args.y_max
        )));
    }
    let step = if args.y_steps > 1 {
        (args.y_max - args.y_min) / (args.y_steps - 1) as f64
    } else {
        0.0
    };
    let rows: Vec<DensityRow> = (0..args.y_steps)
        .map(|i| {
            let y = args.y_min + i as f64 * step;
            let rho = params.density(y);
            let weighted = args.moments.iter().map(|a| (params.log_density(y) + a * y).exp()).collect();
            DensityRow { y, rho, weighted }
        })
        .collect();
    let moments = args
        .moments
        .iter()
        .enumerate()
        .map(|(j, &a)| MomentCheck {
            a,
            riemann_log: (rows.iter().map(|r| r.weighted[j]).sum::<f64>() * step).ln(),
            analytic_log: params.moment_log(a),
        })
        .collect();
    let table = DensityTable {
        m: cfg.m,
        t: cfg.t,
        step,
        rows,
        moments,
    };
    let text = match cfg.format_or(Format::Csv) {
        Format::Json => to_json(&table)?,
        Format::Csv => {
            let mut header = vec!["y".to_string(), "rho".to_string()];
            header.extend(args.moments.iter().map(|a| format!("rho_exp_{a}")));
            let rows: Vec<Vec<String>> = table
                .rows
                .iter()
                .map(|r| {
                    let mut row = vec![format_f64(r.y), format_f64(r.rho)];
                    row.extend(r.weighted.iter().map(|&w| format_f64(w)));
                    row
                })
                .collect();
            csv_text(&header, &rows)?
        }
    };
    emit(cfg.out.as_deref(), text.as_bytes())
}

#[derive(Serialize)]
struct KernelRow {
    k: usize,
    multiplier: f64,
    bound_log: f64,
    bound_log_minus: f64,
    term_log: f64,
    retained: bool,
    sample_plus: f64,
    sample_minus: f64,
}

#[derive(Serialize)]
struct KernelTable {
    m: usize,
    t: f64,
    window: [f64; 2],
    tolerance: f64,
    max_retained_degree: usize,
    tail_bound_log: f64,
    eta: Vec<f64>,
    xi: Vec<f64>,
    rows: Vec<KernelRow>,
}

fn cmd_kernel_table(args: &KernelTableArgs) -> Result<(), Failure> {
    let cfg = RunConfig::resolve(&args.common)?;
    if cfg.m == 1 {
        return Err(Failure::Usage(
            "kernel-table needs m >= 2; for the circle the heat kernel is the theta series \
             used by `verify --m 1` and `transform` with m = 1"
                .into(),
        ));
    }
    let m = cfg.m;
    let trunc = KernelTruncation::select(m, cfg.t, (args.r_min, args.r_max), args.kernel_tol)?;
    let dim = m + 1;
    let eta = match &args.eta {
        Some(s) => parse_unit("eta", s, dim)?,
        None => Vector64::basis(dim, 1),
    };
    let xi = match &args.xi {
        Some(s) => parse_unit("xi", s, dim)?,
        None => Vector64::basis(dim, 2),
    };
    let rows = (0..=args.max_k)
        .map(|k| -> Result<KernelRow, Failure> {
            Ok(KernelRow {
                k,
                multiplier: trunc.multiplier(k),
                bound_log: kernel_bound_log(k, m, KernelSide::Plus)?,
                bound_log_minus: kernel_bound_log(k, m, KernelSide::Minus)?,
                term_log: truncation_term_log(m, cfg.t, k, args.r_min, args.r_max)?,
                retained: k <= trunc.max_degree,
                sample_plus: czplus(m, k, &eta, &xi)?.max_abs(),
                sample_minus: czminus(m, k as i64 - 1, &eta, &xi)?.max_abs(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let table = KernelTable {
        m,
        t: cfg.t,
        window: [args.r_min, args.r_max],
        tolerance: args.kernel_tol,
        max_retained_degree: trunc.max_degree,
        tail_bound_log: trunc.tail_bound_log,
        eta: eta.components().to_vec(),
        xi: xi.components().to_vec(),
        rows,
    };
    let text = match cfg.format_or(Format::Csv) {
        Format::Json => to_json(&table)?,
        Format::Csv => {
            let header: Vec<String> = [
                "k",
                "multiplier",
                "bound_log",
                "bound_log_minus",
                "term_log",
                "retained",
                "sample_plus",
                "sample_minus",
            ]
            .map(String::from)
            .to_vec();
            let rows: Vec<Vec<String>> = table
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.k.to_string(),
                        format_f64(r.multiplier),
                        format_f64(r.bound_log),
                        format_f64(r.bound_log_minus),
                        format_f64(r.term_log),
                        if r.retained { "yes" } else { "no" }.to_string(),
                        format_f64(r.sample_plus),
                        format_f64(r.sample_minus),
                    ]
                })
                .collect();
            csv_text(&header, &rows)?
        }
    };
    emit(cfg.out.as_deref(), text.as_bytes())
}

type BladeMap = BTreeMap<String, [f64; 2]>;

/// Transform input: either values at the nodes of the rule `(m, degree)`,
/// or a polynomial in `m + 1` variables restricted to the sphere.
#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct TransformInput {
    m: usize,
    degree: Option<usize>,
    values: Option<Vec<BladeMap>>,
    polynomial: Option<Vec<TermRecord>>,
}

#[derive(Serialize)]
struct ModeOut {
    side: KernelSide,
    k: usize,
    gamma_eigenvalue: i64,
    radial_power: i64,
    heat_log_multiplier: f64,
    norm: f64,
    values: Vec<BladeMap>,
}

#[derive(Serialize)]
struct Roundtrip {
    max_inverse_log_multiplier: f64,
    relative_error: f64,
}

#[derive(Serialize)]
struct Evaluation {
    x: Vec<f64>,
    value: BladeMap,
}

#[derive(Serialize)]
struct TransformOutput {
    m: usize,
    t: f64,
    #[serde(rename = "K")]
    band_limit: usize,
    quadrature_degree: usize,
    quadrature_nodes: usize,
    window: [f64; 2],
    input_norm: f64,
    ml2_norm: f64,
    decomposition_residual: f64,
    modes: Vec<ModeOut>,
    roundtrip: Option<Roundtrip>,
    evaluations: Vec<Evaluation>,
}

fn read_sphere_input(input: &TransformInput, cfg: &RunConfig) -> Result<(SphereFunction64, usize), Failure> {
    let m = input.m;
    let dim = m + 1;
    match (&input.values, &input.polynomial) {
        (Some(values), None) => {
            let degree = input
                .degree
                .ok_or_else(|| Failure::Usage("input with `values` must give `degree`".into()))?;
            let rule = Arc::new(build_quadrature::<f64>(m, degree)?);
            let values = values
                .iter()
                .map(|b| Multivector64::from_blade_map(dim, b))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((SphereFunction64::new(rule, values)?, degree))
        }
        (None, Some(records)) => {
            let degree = input.degree.unwrap_or(cfg.quadrature_degree());
            let poly = MvPolynomial64::from_records(dim, records)?;
            let rule = Arc::new(build_quadrature::<f64>(m, degree)?);
            Ok((SphereFunction64::from_polynomial(rule, &poly)?, degree))
        }
        _ => Err(Failure::Usage(
            "input must contain exactly one of `values` or `polynomial`".into(),
        )),
    }
}

fn cmd_transform(args: &TransformArgs) -> Result<(), Failure> {
    let mut cfg = RunConfig::resolve(&args.common)?;
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| Failure::Usage(format!("cannot read input {}: {e}", args.input.display())))?;
    let input: TransformInput =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("malformed input: {e}")))?;
    if args.common.m.is_some_and(|m| m != input.m) {
        return Err(Failure::Usage(format!(
            "`m` flag ({}) disagrees with the input file ({})",
            cfg.m, input.m
        )));
    }
    cfg.m = input.m;
    cfg.validate()?;
    let (f, degree) = read_sphere_input(&input, &cfg)?;
    let m = cfg.m;
    let lm = cst_forward(&f, cfg.t, cfg.band_limit)?;
    let params = MeasureParams::new(m, cfg.t)?;

    let roundtrip = if args.inverse {
        let back = cst_inverse(&lm, cfg.t)?;
        let err = back.try_sub(&f)?.norm() / f.norm().max(f64::MIN_POSITIVE);
        Some(Roundtrip {
            max_inverse_log_multiplier: inverse_log_multiplier(m, cfg.t, cfg.band_limit),
            relative_error: err,
        })
    } else {
        None
    };

    let mut evaluations = Vec::new();
    if let Some(radii) = &args.radii {
        let radii = parse_list("radii", radii)?;
        let directions = match &args.directions {
            Some(s) => s
                .split(';')
                .map(|d| parse_unit("directions", d, m + 1))
                .collect::<Result<Vec<_>, _>>()?,
            None => (1..=m + 1).map(|j| Vector64::basis(m + 1, j)).collect(),
        };
        for &r in &radii {
            for d in &directions {
                let x = d.scale(r);
                let value = lm.evaluate(&x)?.to_blade_map();
                evaluations.push(Evaluation {
                    x: x.components().to_vec(),
                    value,
                });
            }
        }
    }

    let parts = lm.spherical_parts();
    let modes = parts
        .components()
        .map(|(mode, g)| ModeOut {
            side: mode.side,
            k: mode.k,
            gamma_eigenvalue: mode.gamma_eigenvalue(m),
            radial_power: mode.radial_power(m),
            heat_log_multiplier: mode.heat_log_multiplier(m, cfg.t) + 0.0,
            norm: g.norm(),
            values: g.values().iter().map(|v| v.to_blade_map()).collect(),
        })
        .collect();
    let (r_min, r_max) = lm.window();
    let out = TransformOutput {
        m,
        t: cfg.t,
        band_limit: cfg.band_limit,
        quadrature_degree: degree,
        quadrature_nodes: f.values().len(),
        window: [r_min, r_max],
        input_norm: f.norm(),
        ml2_norm: ml2_norm(&lm, &params)?,
        decomposition_residual: parts.residual_norm(),
        modes,
        roundtrip,
        evaluations,
    };
    let text = match cfg.format_or(Format::Json) {
        Format::Json => to_json(&out)?,
        Format::Csv => {
            let header: Vec<String> = ["side", "k", "gamma_eigenvalue", "radial_power", "heat_log_multiplier", "norm"]
                .map(String::from)
                .to_vec();
            let rows: Vec<Vec<String>> = out
                .modes
                .iter()
                .map(|r| {
                    vec![
                        match r.side {
                            KernelSide::Plus => "plus".to_string(),
                            KernelSide::Minus => "minus".to_string(),
                        },
                        r.k.to_string(),
                        r.gamma_eigenvalue.to_string(),
                        r.radial_power.to_string(),
                        format_f64(r.heat_log_multiplier),
                        format_f64(r.norm),
                    ]
                })
                .collect();
            csv_text(&header, &rows)?
        }
    };
    emit(cfg.out.as_deref(), text.as_bytes())?;
    if let Some(rt) = &out.roundtrip {
        if rt.relative_error > cfg.tolerances.roundtrip {
            return Err(Failure::Check(format!(
                "transform: roundtrip error {:.3e} exceeds {:.1e}",
                rt.relative_error, cfg.tolerances.roundtrip
            )));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct BenchReport {
    m: usize,
    t: f64,
    #[serde(rename = "K")]
    band_limit: usize,
    trials: usize,
    threads: usize,
    quadrature_nodes: usize,
    seconds: f64,
    seconds_per_trial: f64,
    pass: bool,
}

fn cmd_bench(args: &BenchArgs) -> Result<(), Failure> {
    let cfg = RunConfig::resolve(&args.common)?;
    let vc = verify_config(&cfg)?;
    let start = Instant::now();
    let report = verify_unitarity(&vc)?;
    let seconds = start.elapsed().as_secs_f64();
    let bench = BenchReport {
        m: cfg.m,
        t: cfg.t,
        band_limit: cfg.band_limit,
        trials: cfg.trials,
        threads: rayon::current_num_threads(),
        quadrature_nodes: report.quadrature_nodes,
        seconds,
        seconds_per_trial: seconds / cfg.trials as f64,
        pass: report.pass,
    };
    let text = match cfg.format_or(Format::Json) {
        Format::Json => to_json(&bench)?,
        Format::Csv => csv_text(
            &["m", "t", "K", "trials", "threads", "quadrature_nodes", "seconds", "seconds_per_trial", "pass"]
                .map(String::from),
            &[vec![
                bench.m.to_string(),
                format_f64(bench.t),
                bench.band_limit.to_string(),
                bench.trials.to_string(),
                bench.threads.to_string(),
                bench.quadrature_nodes.to_string(),
                format_f64(bench.seconds),
                format_f64(bench.seconds_per_trial),
                bench.pass.to_string(),
            ]],
        )?,
    };
    emit(cfg.out.as_deref(), text.as_bytes())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("{THREADS_VAR} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(format!("cannot configure {n} threads: {e}")))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    configure_threads()?;
    match &cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Density(a) => cmd_density(a),
        Command::KernelTable(a) => cmd_kernel_table(a),
        Command::Transform(a) => cmd_transform(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
