//! `mixedpowers`: exact coefficients, critical points, phase expansions and
//! saddle-point estimates for mixed powers of generating functions.
//!
//! Exit codes: 0 success, 1 numerical or internal failure, 2 invalid input,
//! 3 domain error, 4 coalescing saddle, 5 tolerance violation.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mixedpowers::applications::airy::map_airy_density;
use mixedpowers::applications::planar::{
    coalescence_diagnostic, planar_core_estimate, planar_core_exact, planar_core_gaussian, PlanarCoreQuery,
};
use mixedpowers::applications::trivariate::{
    bounded_t_formula, gaussian_formula, growing_t_formula, critical_z, trivariate_estimate, trivariate_exact,
    TrivariateQuery,
};
use mixedpowers::critical_locus::solve_critical;
use mixedpowers::function_system::{direction_of, exact_coefficient, reduce_vanishing, Reduction};
use mixedpowers::precision::PRECISION_ENV;
use mixedpowers::saddle_engine::estimate;
use mixedpowers::sweep::{check_tolerance, run_sweep, write_csv, SweepSpec};
use mixedpowers::{
    BigCoefficient, Direction, Error, ExponentVector, FunctionSystem, MethodChoice, NormSpec, Precision,
    SystemDescriptor,
};

#[derive(Parser)]
#[command(name = "mixedpowers", version, about = "Coefficients of mixed powers of generating functions")]
struct Cli {
    /// Mantissa bits for high-precision logarithms and phase coefficients.
    #[arg(long, global = true, env = PRECISION_ENV, default_value_t = 128)]
    precision: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact coefficient [z^n0] f_0 prod f_j^n_j.
    Oracle(OracleArgs),
    /// Critical point Z(d) with its minimality certificate.
    Critical(PointArgs),
    /// Taylor coefficients c_2..c_K of the phase term at the critical point.
    Phase(PhaseArgs),
    /// Saddle-point estimate of a coefficient.
    Estimate(EstimateArgs),
    /// Run a sweep, write a CSV and check its tolerance.
    Verify(VerifyArgs),
    /// Canned pipelines.
    App(AppArgs),
}

#[derive(Args)]
struct SystemArgs {
    /// JSON system descriptor.
    #[arg(long)]
    system: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Exponent vector n0,n1,...,nm.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<u64>,
    /// Factor out powers of z from factors vanishing at 0 and shift n0.
    #[arg(long)]
    reduce: bool,
}

#[derive(Args)]
struct PointArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Exponent vector; its direction n/|n| is used.
    #[arg(long, value_delimiter = ',', conflicts_with = "direction", required_unless_present = "direction")]
    n: Option<Vec<u64>>,
    /// Direction d0,d1,...,dm; rescaled to unit norm.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    direction: Option<Vec<f64>>,
}

#[derive(Args)]
struct PhaseArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Highest coefficient index K.
    #[arg(long, default_value_t = 4)]
    order: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Gaussian,
    Quadrature,
    SmallLimit,
}

impl From<MethodArg> for MethodChoice {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => MethodChoice::Auto,
            MethodArg::Gaussian => MethodChoice::Gaussian,
            MethodArg::Quadrature => MethodChoice::Quadrature,
            MethodArg::SmallLimit => MethodChoice::SmallLimit,
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<u64>,
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
    /// Half-width of the integration arc (large-exponent quadrature).
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    reduce: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Sweep specification (JSON).
    #[arg(long)]
    sweep: PathBuf,
    /// CSV output path.
    #[arg(long)]
    output: PathBuf,
    /// Worker threads (default: logical cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct AppArgs {
    #[command(subcommand)]
    app: App,
    /// Print the map-Airy density on a grid as CSV instead of the JSON report.
    #[arg(long, global = true)]
    emit_density_table: bool,
    /// Grid spacing of the density table.
    #[arg(long, global = true, default_value_t = 0.05)]
    density_step: f64,
}

#[derive(Subcommand)]
enum App {
    /// c(n,k,t) = [x^n y^k z^t] C(x,y,z).
    Trivariate {
        n: u64,
        k: u64,
        t: u64,
        #[arg(long, value_enum, default_value = "auto")]
        method: MethodArg,
    },
    /// [z^(n-1)] phi^n psi^(k-1) psi' for planar-map cores.
    PlanarCore { n: u64, k: u64 },
    /// Only the density table.
    Density,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::ConstraintViolation { .. }
            | Error::InvalidInput(_)
            | Error::Parse(_)
            | Error::NormMismatch { .. }
            | Error::BadEpsilon { .. }
            | Error::Io(_)
            | Error::Json(_) => 2,
            Error::Domain(_)
            | Error::Pole { .. }
            | Error::PoleOnContour { .. }
            | Error::NoSolution(_)
            | Error::NonConvergence { .. }
            | Error::NotStrictlyMinimal { .. }
            | Error::NoValidEpsilon(_)
            | Error::Regime(_) => 3,
            Error::Coalescence { .. } => 4,
            Error::Convergence(_) | Error::InternalInconsistency(_) => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

type CmdResult = Result<(), Failure>;

fn load_descriptor(args: &SystemArgs) -> Result<SystemDescriptor, Error> {
    let text = fs::read_to_string(&args.system)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", args.system.display())))?;
    SystemDescriptor::from_json(&text)
}

fn print_json(v: &Value) -> CmdResult {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v).map_err(|e| Failure::from(Error::from(e)))?;
    writeln!(out).map_err(|e| Failure::from(Error::from(e)))
}

fn to_value<T: serde::Serialize>(x: &T) -> Result<Value, Error> {
    Ok(serde_json::to_value(x)?)
}

/// The system and exponent vector after the optional reduction; `None` when
/// the coefficient is identically zero.
fn prepare(
    descriptor: &SystemDescriptor,
    n: Vec<u64>,
    reduce: bool,
) -> Result<Option<(FunctionSystem, ExponentVector, u64)>, Error> {
    let n = ExponentVector::new(n)?;
    if !reduce {
        let system = descriptor.build()?;
        system.check_arity(n.as_slice().len())?;
        return Ok(Some((system, n, 0)));
    }
    let raw = descriptor.build_unchecked()?;
    raw.check_arity(n.as_slice().len())?;
    match reduce_vanishing(&raw, &n) {
        Reduction::Vanishes { .. } => Ok(None),
        Reduction::Reduced { system, n, shift } => {
            system.validate()?;
            Ok(Some((system, n, shift)))
        }
    }
}

fn cmd_oracle(args: OracleArgs, precision: Precision) -> CmdResult {
    let descriptor = load_descriptor(&args.system)?;
    let (coeff, shift, n) = match prepare(&descriptor, args.n.clone(), args.reduce)? {
        None => (BigCoefficient::new(Default::default()), None, args.n),
        Some((system, n, shift)) => {
            let c = exact_coefficient(&system, &n)?;
            (BigCoefficient::with_precision(c.value().clone(), precision), Some(shift), n.as_slice().to_vec())
        }
    };
    let mut v = to_value(&coeff)?;
    v["n"] = json!(n);
    if args.reduce {
        v["shift"] = json!(shift);
    }
    print_json(&v)
}

fn resolve_direction(system: &FunctionSystem, args: &PointArgs, norm: &NormSpec) -> Result<Direction, Error> {
    let d = match (&args.n, &args.direction) {
        (Some(n), _) => direction_of(&ExponentVector::new(n.clone())?, norm)?,
        (None, Some(d)) => Direction::normalized(d, norm.clone())?,
        (None, None) => return Err(Error::InvalidInput("give --n or --direction".into())),
    };
    system.check_arity(d.coords().len())?;
    Ok(d)
}

fn cmd_critical(args: PointArgs) -> CmdResult {
    let descriptor = load_descriptor(&args.system)?;
    let system = descriptor.build()?;
    let d = resolve_direction(&system, &args, &descriptor.norm)?;
    let cp = solve_critical(&system, &d, None)?;
    let mut v = to_value(&cp)?;
    v["direction"] = json!(d.coords());
    print_json(&v)
}

fn cmd_phase(args: PhaseArgs, precision: Precision) -> CmdResult {
    let descriptor = load_descriptor(&args.point.system)?;
    let system = descriptor.build()?;
    let d = resolve_direction(&system, &args.point, &descriptor.norm)?;
    let e = mixedpowers::taylor_F(&system, &d, args.order, precision)?;
    print_json(&to_value(&e)?)
}

fn cmd_estimate(args: EstimateArgs, precision: Precision) -> CmdResult {
    let descriptor = load_descriptor(&args.system)?;
    match prepare(&descriptor, args.n, args.reduce)? {
        None => print_json(&json!({"sign": 0, "log_abs": null, "note": "coefficient vanishes after reduction"})),
        Some((system, n, _)) => {
            let e = estimate(&system, &n, &descriptor.norm, args.method.into(), args.epsilon, precision)?;
            print_json(&to_value(&e)?)
        }
    }
}

fn cmd_verify(args: VerifyArgs, precision: Precision) -> CmdResult {
    let descriptor = load_descriptor(&args.system)?;
    let text = fs::read_to_string(&args.sweep)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", args.sweep.display())))?;
    let spec = SweepSpec::from_json(&text)?;
    let report = run_sweep(&descriptor, &spec, precision, args.jobs)?;
    let file = fs::File::create(&args.output).map_err(Error::from)?;
    write_csv(&report, io::BufWriter::new(file))?;
    let outcome = check_tolerance(&report, &spec.tolerance);
    let summary = json!({
        "rows": report.rows.len(),
        "output": args.output.display().to_string(),
        "metadata": to_value(&report.metadata)?,
        "tolerance": to_value(&spec.tolerance)?,
        "pass": outcome.is_ok(),
    });
    print_json(&summary)?;
    match outcome {
        Ok(()) => Ok(()),
        Err(v) => Err(Failure {
            code: 5,
            message: format!(
                "tolerance violated at row {} (n = {}): {}",
                v.row, v.n, v.reason
            ),
        }),
    }
}

fn estimate_or_error(r: Result<mixedpowers::AsymptoticEstimate, Error>) -> Result<Value, Error> {
    match r {
        Ok(e) => to_value(&e),
        Err(e) => Ok(json!({"error": e.to_string()})),
    }
}

fn density_table(step: f64) -> CmdResult {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidInput(format!("density step must lie in (0, 1], got {step}")).into());
    }
    let mut out = io::stdout().lock();
    let io_err = |e: io::Error| Failure::from(Error::from(e));
    writeln!(out, "x,density").map_err(io_err)?;
    let lo = (-8.0 / step).round() as i64;
    let hi = (10.0 / step).round() as i64;
    for i in lo..=hi {
        // Rounded so grid points print as 0.15 rather than 0.15000000000000002.
        let x = (i as f64 * step * 1e9).round() / 1e9;
        writeln!(out, "{x},{}", map_airy_density(x)).map_err(io_err)?;
    }
    Ok(())
}

fn cmd_app(args: AppArgs, precision: Precision) -> CmdResult {
    if args.emit_density_table {
        return density_table(args.density_step);
    }
    match args.app {
        App::Trivariate { n, k, t, method } => {
            let q = TrivariateQuery::new(n, k, t)?;
            let exact = trivariate_exact(&q)?;
            let est = trivariate_estimate(&q, method.into(), precision);
            let est_json = match &est {
                Ok(e) => to_value(e)?,
                Err(e) => json!({"error": e.to_string()}),
            };
            let mut v = json!({
                "query": to_value(&q)?,
                "exact": to_value(&exact)?,
                "z": critical_z(&q).ok(),
                "estimate": est_json,
                "gaussian_formula": estimate_or_error(gaussian_formula(&q, precision))?,
                "bounded_t_formula": estimate_or_error(bounded_t_formula(&q, precision))?,
                "growing_t_formula": estimate_or_error(growing_t_formula(&q, precision))?,
            });
            if let Ok(e) = &est {
                v["rel_error"] = json!(e.rel_error(&exact));
            }
            print_json(&v)?;
            est.map(|_| ()).map_err(Failure::from)
        }
        App::PlanarCore { n, k } => {
            let q = PlanarCoreQuery::new(n, k)?;
            let exact = planar_core_exact(&q)?;
            let est = planar_core_estimate(&q, precision)?;
            let v = json!({
                "query": to_value(&q)?,
                "exact": to_value(&exact)?,
                "estimate": to_value(&est)?,
                "rel_error": est.rel_error(&exact),
                "gaussian": estimate_or_error(planar_core_gaussian(&q, precision))?,
                "coalescence": to_value(&coalescence_diagnostic(&q, precision)?)?,
            });
            print_json(&v)
        }
        App::Density => density_table(args.density_step),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let precision = match Precision::new(cli.precision) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Oracle(a) => cmd_oracle(a, precision),
        Command::Critical(a) => cmd_critical(a),
        Command::Phase(a) => cmd_phase(a, precision),
        Command::Estimate(a) => cmd_estimate(a, precision),
        Command::Verify(a) => cmd_verify(a, precision),
        Command::App(a) => cmd_app(a, precision),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
