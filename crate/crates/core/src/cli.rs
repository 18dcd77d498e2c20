//! Command-line front end. The binary is a thin wrapper around [`run`].
//!
//! Exit codes: 0 pass, 1 fail, 2 inconclusive, 3 a hypothesis of the checked
//! inequality does not hold, 4 usage, parse or I/O error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::ExponentTable;
use crate::polymatrix::PolyMatrix;
use crate::subdiff::{AuxiliarySetup, PointSpectrum, SlopeOptions};
use crate::verify::{self, DistanceOptions, SamplePlan, VerificationReport};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_USAGE: i32 = 4;

/// Finite-difference step and tolerance used by `grad-check`.
const FD_STEP: f64 = 1e-5;
const FD_TOL: f64 = 1e-4;

#[derive(Parser, Debug)]
#[command(
    name = "svloja",
    version,
    about = "Smallest singular values of polynomial matrices: exponents, slopes and inequality checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print every exponent bound for (n, p, d) or for a matrix file.
    Exponents(ExponentsArgs),
    /// Evaluate f(x) = σ_min(F(x)).
    Eval(PointArgs),
    /// Estimate the nonsmooth slope of f at a point.
    Slope(SlopeArgs),
    /// Compare the smooth gradient with central finite differences.
    GradCheck(PointArgs),
    /// Fit the empirical exponent of the gradient inequality.
    Fit(FitArgs),
    /// Estimate the distance from a point to the zero set of F.
    Dist(DistArgs),
    /// Empirical checks of the inequalities.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Subcommand, Debug)]
enum VerifyCommand {
    /// Gradient inequality near a base point.
    Gradient(GradientArgs),
    /// Distance to S_F against a power of f on a ball.
    ErrorBound(RegionArgs),
    /// Distance to S_F ∩ S_G against a power of the two distances (two matrices).
    Separation(RegionArgs),
    /// Global separation on spheres around the origin (two matrices).
    GlobalSeparation(ScheduleArgs),
    /// Factorization on K = {h = 0} inside a box (matrices F, G, H).
    Factorization(RegionArgs),
    /// Global lower bound for f on spheres around the origin.
    Global(ScheduleArgs),
    /// Tail bound f(x) ≥ c‖x‖^(−e) read off the global samples.
    CompactTail(CompactTailArgs),
    /// Whether the slope stays bounded away from zero far out.
    GoodAtInfinity(ScheduleArgs),
    /// Global Hölder-type error bound (needs goodness at infinity).
    Holder(ScheduleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MatrixArgs {
    /// Matrix JSON file; repeat for commands taking several matrices.
    #[arg(short = 'm', long = "matrix", required = true)]
    matrices: Vec<PathBuf>,
}

#[derive(Args, Debug)]
struct ToleranceArgs {
    #[arg(long, default_value_t = crate::subdiff::DEFAULT_ZERO_TOL)]
    zero_tol: f64,
    #[arg(long, default_value_t = crate::numlin::DEFAULT_EIGENSPACE_TOL)]
    eig_tol: f64,
    #[arg(long, default_value_t = crate::subdiff::DEFAULT_SPHERE_SAMPLES)]
    sphere_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[command(flatten)]
    tol: ToleranceArgs,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Acceptance threshold for zeros found by the distance search.
    #[arg(long, default_value_t = 1e-8)]
    dist_tol: f64,
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    #[arg(long, env = "SVLOJA_WORKERS", default_value_t = 1)]
    workers: usize,
}

impl PlanArgs {
    fn plan(&self) -> SamplePlan {
        SamplePlan {
            samples_per_radius: self.samples,
            seed: self.tol.seed,
            sphere_samples: self.tol.sphere_samples,
            zero_tol: self.tol.zero_tol,
            eig_tol: self.tol.eig_tol,
            distance: DistanceOptions {
                restarts: self.restarts,
                tol: self.dist_tol,
                ..DistanceOptions::default()
            },
            workers: self.workers.max(1),
            ..SamplePlan::default()
        }
    }
}

#[derive(Args, Debug)]
struct ExponentsArgs {
    #[arg(long, conflicts_with = "matrix")]
    n: Option<u64>,
    #[arg(long, conflicts_with = "matrix")]
    p: Option<u64>,
    #[arg(long, conflicts_with = "matrix")]
    q: Option<u64>,
    #[arg(long, conflicts_with = "matrix")]
    d: Option<u64>,
    #[arg(short = 'm', long)]
    matrix: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct PointArgs {
    #[command(flatten)]
    matrices: MatrixArgs,
    /// Point as comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    #[command(flatten)]
    tol: ToleranceArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SlopeArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Base point x̄; the slope does not depend on it, only f̃ does.
    #[arg(long, allow_hyphen_values = true)]
    base: Option<String>,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    matrices: MatrixArgs,
    #[arg(long, allow_hyphen_values = true)]
    base: String,
    /// Comma-separated strictly decreasing radii.
    #[arg(long)]
    radii: Option<String>,
    #[command(flatten)]
    plan: PlanArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct DistArgs {
    #[command(flatten)]
    matrices: MatrixArgs,
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    #[command(flatten)]
    plan: PlanArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct GradientArgs {
    #[command(flatten)]
    matrices: MatrixArgs,
    #[arg(long, allow_hyphen_values = true)]
    base: String,
    /// Use the sharper exponent available when f(base) = 0.
    #[arg(long)]
    at_zero: bool,
    #[arg(long)]
    radii: Option<String>,
    #[command(flatten)]
    plan: PlanArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct RegionArgs {
    #[command(flatten)]
    matrices: MatrixArgs,
    /// Region center (defaults to the origin).
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    /// Ball radius, or box half-width for `factorization`.
    #[arg(long)]
    radius: f64,
    #[command(flatten)]
    plan: PlanArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct ScheduleArgs {
    #[command(flatten)]
    matrices: MatrixArgs,
    /// Comma-separated increasing sphere radii (default 1,10,100,1000).
    #[arg(long)]
    schedule: Option<String>,
    #[command(flatten)]
    plan: PlanArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct CompactTailArgs {
    #[command(flatten)]
    schedule: ScheduleArgs,
    /// Only samples with norm at least this enter the tail check.
    #[arg(long, default_value_t = 1.0)]
    r_big: f64,
}

fn parse_vector(text: &str, what: &str) -> Result<Vec<f64>> {
    let values: std::result::Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse::<f64>()).collect();
    match values {
        Ok(v) if !v.is_empty() && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(Error::Schema(format!("{what}: expected comma-separated finite numbers, got `{text}`"))),
    }
}

fn load(args: &MatrixArgs, count: usize, command: &str) -> Result<Vec<PolyMatrix>> {
    if args.matrices.len() != count {
        return Err(Error::Schema(format!(
            "`{command}` takes {count} matri{} (-m), got {}",
            if count == 1 { "x" } else { "ces" },
            args.matrices.len()
        )));
    }
    args.matrices.iter().map(PolyMatrix::load).collect()
}

enum Outcome {
    Report(VerificationReport),
    Value { json: String, text: String, code: i32 },
}

fn value<T: Serialize>(v: &T, text: String, code: i32) -> Result<Outcome> {
    let json = serde_json::to_string_pretty(v).map_err(|e| Error::Internal(e.to_string()))?;
    Ok(Outcome::Value { json, text, code })
}

fn slope_options(t: &ToleranceArgs) -> SlopeOptions {
    SlopeOptions {
        sphere_samples: t.sphere_samples,
        seed: t.seed,
        zero_tol: t.zero_tol,
        eig_tol: t.eig_tol,
    }
}

fn origin_or(center: &Option<String>, n: usize) -> Result<Vec<f64>> {
    match center {
        Some(c) => parse_vector(c, "--center"),
        None => Ok(vec![0.0; n]),
    }
}

fn schedule(s: &Option<String>) -> Result<Vec<f64>> {
    match s {
        Some(s) => parse_vector(s, "--schedule"),
        None => Ok(verify::default_global_radii()),
    }
}

fn with_radii(plan: SamplePlan, radii: &Option<String>) -> Result<SamplePlan> {
    Ok(match radii {
        Some(r) => plan.with_radii(parse_vector(r, "--radii")?),
        None => plan,
    })
}

#[derive(Serialize)]
struct EvalOutput {
    x: Vec<f64>,
    f: f64,
    lambda_min: f64,
    multiplicity: usize,
    transposed: bool,
}

#[derive(Serialize)]
struct GradCheckOutput {
    x: Vec<f64>,
    smooth: bool,
    gradient: Option<Vec<f64>>,
    finite_difference: Vec<f64>,
    relative_error: Option<f64>,
    tolerance: f64,
}

fn execute(command: &Command) -> Result<(Outcome, Format, Option<PathBuf>)> {
    match command {
        Command::Exponents(a) => {
            let table = match (&a.matrix, a.n, a.p, a.d) {
                (Some(path), ..) => {
                    let m = PolyMatrix::load(path)?;
                    let d = m.require_positive_degree()?;
                    ExponentTable::compute(m.nvars() as u64, m.rows() as u64, Some(m.cols() as u64), d as u64)?
                }
                (None, Some(n), Some(p), Some(d)) => ExponentTable::compute(n, p, a.q, d)?,
                _ => return Err(Error::Schema("give either -m FILE or all of --n, --p, --d".into())),
            };
            let text = table.to_text();
            Ok((value(&table, text, EXIT_PASS)?, a.output.format, a.output.out.clone()))
        }
        Command::Eval(a) => {
            let m = load(&a.matrices, 1, "eval")?.remove(0);
            let x = parse_vector(&a.x, "--x")?;
            crate::error::check_dim(m.nvars(), x.len())?;
            let s = PointSpectrum::compute(&m, &x)?;
            let out = EvalOutput {
                multiplicity: s.minimizer_set(a.tol.eig_tol).multiplicity,
                x,
                f: s.f,
                lambda_min: s.lambda_min,
                transposed: m.is_transposed(),
            };
            let text = format!(
                "f(x)         {:?}\nlambda_min   {:?}\nmultiplicity {}\n",
                out.f, out.lambda_min, out.multiplicity
            );
            Ok((value(&out, text, EXIT_PASS)?, a.output.format, a.output.out.clone()))
        }
        Command::Slope(a) => {
            let p = &a.point;
            let m = load(&p.matrices, 1, "slope")?.remove(0);
            let x = parse_vector(&p.x, "--x")?;
            let setup = match &a.base {
                Some(b) => AuxiliarySetup::new(&m, &parse_vector(b, "--base")?)?,
                None => AuxiliarySetup::at_zero(&m),
            };
            let est = setup.slope_f(&x, &slope_options(&p.tol))?;
            let text = format!(
                "slope        {:?}\nexact        {}\nmultiplicity {}\nwitness_y    {:?}\n",
                est.value, est.exact, est.multiplicity, est.witness_y
            );
            Ok((value(&est, text, EXIT_PASS)?, p.output.format, p.output.out.clone()))
        }
        Command::GradCheck(a) => {
            let m = load(&a.matrices, 1, "grad-check")?.remove(0);
            let x = parse_vector(&a.x, "--x")?;
            let setup = AuxiliarySetup::at_zero(&m);
            let gradient = setup.smooth_gradient(&x, &slope_options(&a.tol))?;
            let fd = finite_difference(&m, &x)?;
            let relative_error = gradient.as_ref().map(|g| {
                let diff: Vec<f64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
                crate::numlin::norm(&diff) / crate::numlin::norm(&fd).max(1e-300)
            });
            let code = match relative_error {
                None => EXIT_INCONCLUSIVE,
                Some(e) if e <= FD_TOL => EXIT_PASS,
                Some(_) => EXIT_FAIL,
            };
            let text = match (&gradient, relative_error) {
                (Some(g), Some(e)) => format!(
                    "gradient          {g:?}\nfinite difference {fd:?}\nrelative error    {e:e}\n"
                ),
                _ => format!("not smooth here (repeated smallest singular value or f(x) = 0)\nfinite difference {fd:?}\n"),
            };
            let out = GradCheckOutput {
                x,
                smooth: gradient.is_some(),
                gradient,
                finite_difference: fd,
                relative_error,
                tolerance: FD_TOL,
            };
            Ok((value(&out, text, code)?, a.output.format, a.output.out.clone()))
        }
        Command::Fit(a) => {
            let m = load(&a.matrices, 1, "fit")?.remove(0);
            let base = parse_vector(&a.base, "--base")?;
            let plan = with_radii(a.plan.plan(), &a.radii)?;
            let fit = verify::fit_empirical_exponent(&m, &base, &plan)?;
            let text = format!("alpha_emp    {:.6}\nr_squared    {:.6}\n", fit.alpha, fit.r_squared);
            Ok((value(&fit, text, EXIT_PASS)?, a.output.format, a.output.out.clone()))
        }
        Command::Dist(a) => {
            let m = load(&a.matrices, 1, "dist")?.remove(0);
            let x = parse_vector(&a.x, "--x")?;
            let plan = a.plan.plan();
            let est = verify::estimate_distance_to_zero_set(&m, &x, &plan.distance, plan.seed)?;
            let text = format!(
                "distance     {:?}\nwitness      {:?}\nresidual     {:e}\n",
                est.value, est.witness, est.residual
            );
            Ok((value(&est, text, EXIT_PASS)?, a.output.format, a.output.out.clone()))
        }
        Command::Verify(v) => execute_verify(v),
    }
}

fn finite_difference(m: &PolyMatrix, x: &[f64]) -> Result<Vec<f64>> {
    (0..x.len())
        .map(|k| {
            let mut plus = x.to_vec();
            let mut minus = x.to_vec();
            plus[k] += FD_STEP;
            minus[k] -= FD_STEP;
            let fp = crate::subdiff::smallest_singular_value(m, &plus)?;
            let fm = crate::subdiff::smallest_singular_value(m, &minus)?;
            Ok((fp - fm) / (2.0 * FD_STEP))
        })
        .collect()
}

fn execute_verify(v: &VerifyCommand) -> Result<(Outcome, Format, Option<PathBuf>)> {
    let report = |r: VerificationReport, o: &OutputArgs| Ok((Outcome::Report(r), o.format, o.out.clone()));
    match v {
        VerifyCommand::Gradient(a) => {
            let m = load(&a.matrices, 1, "verify gradient")?.remove(0);
            let base = parse_vector(&a.base, "--base")?;
            let plan = with_radii(a.plan.plan(), &a.radii)?;
            report(verify::verify_gradient_inequality(&m, &base, &plan, a.at_zero)?, &a.output)
        }
        VerifyCommand::ErrorBound(a) => {
            let m = load(&a.matrices, 1, "verify error-bound")?.remove(0);
            let c = origin_or(&a.center, m.nvars())?;
            report(verify::verify_error_bound(&m, &c, a.radius, &a.plan.plan())?, &a.output)
        }
        VerifyCommand::Separation(a) => {
            let ms = load(&a.matrices, 2, "verify separation")?;
            let c = origin_or(&a.center, ms[0].nvars())?;
            report(verify::verify_separation(&ms[0], &ms[1], &c, a.radius, &a.plan.plan())?, &a.output)
        }
        VerifyCommand::GlobalSeparation(a) => {
            let ms = load(&a.matrices, 2, "verify global-separation")?;
            let s = schedule(&a.schedule)?;
            report(verify::verify_global_separation(&ms[0], &ms[1], &s, &a.plan.plan())?, &a.output)
        }
        VerifyCommand::Factorization(a) => {
            let ms = load(&a.matrices, 3, "verify factorization")?;
            let c = origin_or(&a.center, ms[0].nvars())?;
            report(
                verify::verify_factorization(&ms[0], &ms[1], &ms[2], &c, a.radius, &a.plan.plan())?,
                &a.output,
            )
        }
        VerifyCommand::Global(a) => {
            let m = load(&a.matrices, 1, "verify global")?.remove(0);
            report(verify::verify_global(&m, &schedule(&a.schedule)?, &a.plan.plan())?, &a.output)
        }
        VerifyCommand::CompactTail(a) => {
            let s = &a.schedule;
            let m = load(&s.matrices, 1, "verify compact-tail")?.remove(0);
            let global = verify::verify_global(&m, &schedule(&s.schedule)?, &s.plan.plan())?;
            report(verify::compact_tail_view(&global, a.r_big)?, &s.output)
        }
        VerifyCommand::GoodAtInfinity(a) => {
            let m = load(&a.matrices, 1, "verify good-at-infinity")?.remove(0);
            let g = verify::check_good_at_infinity(&m, &schedule(&a.schedule)?, &a.plan.plan())?;
            let code = if g.good { EXIT_PASS } else { EXIT_FAIL };
            Ok((value(&g, g.to_text(), code)?, a.output.format, a.output.out.clone()))
        }
        VerifyCommand::Holder(a) => {
            let m = load(&a.matrices, 1, "verify holder")?.remove(0);
            report(verify::verify_holder_global(&m, &schedule(&a.schedule)?, &a.plan.plan())?, &a.output)
        }
    }
}

fn render(outcome: &Outcome, format: Format) -> Result<(String, i32)> {
    match (outcome, format) {
        (Outcome::Report(r), Format::Json) => Ok((r.to_json()? + "\n", r.verdict.exit_code())),
        (Outcome::Report(r), Format::Csv) => Ok((r.to_csv()?, r.verdict.exit_code())),
        (Outcome::Report(r), Format::Text) => Ok((r.to_text(), r.verdict.exit_code())),
        (Outcome::Value { json, code, .. }, Format::Json) => Ok((format!("{json}\n"), *code)),
        (Outcome::Value { text, code, .. }, Format::Text) => Ok((text.clone(), *code)),
        (Outcome::Value { .. }, Format::Csv) => {
            Err(Error::Schema("csv output is only available for verification reports".into()))
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    if e.is_precondition() {
        EXIT_PRECONDITION
    } else {
        EXIT_USAGE
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Reports go to `stdout` (or `--out`), diagnostics
/// to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(rendered.as_bytes());
                    EXIT_PASS
                }
                _ => {
                    let _ = stderr.write_all(rendered.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = execute(&cli.command).and_then(|(outcome, format, out)| {
        let (text, code) = render(&outcome, format)?;
        match out {
            Some(path) => std::fs::write(&path, text)?,
            None => stdout.write_all(text.as_bytes())?,
        }
        Ok(code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code_for(&e)
        }
    }
}
