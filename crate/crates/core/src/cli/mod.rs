//! Command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 when a check or scenario
//! assertion fails, 2 on errors.

mod convert;
mod io;
mod scenario;

pub use convert::{convert, parse_text, read_measure, render_measure, Format};
pub use scenario::{run_scenario, Assertion, ScenarioConfig, ScenarioReport, SCENARIOS};

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::gaussflow::{self, FlowError, Grid, PathSample, ProcessSpec};
use crate::kronecker::{self, KroneckerError, Method, SolveOptions, UnimodularTarget, WeakTarget};
use crate::numkit::rational::parse_rational;
use crate::numkit::{NumkitError, Real, Tier};
use crate::qindep::{self, Bounds, QindepError};
use crate::specmeasure::{self as sm, MeasureError, MetricConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Numkit(#[from] NumkitError),
    #[error(transparent)]
    Qindep(#[from] QindepError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Kronecker(#[from] KroneckerError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Usage(String),
    #[error("unknown scenario `{0}` (known: {known})", known = SCENARIOS.join(", "))]
    UnknownScenario(String),
    #[error("{context}: {source}")]
    Context { context: String, source: Box<CliError> },
}

pub(crate) trait Context<T> {
    fn context(self, what: impl Into<String>) -> Result<T, CliError>;
}

impl<T, E: Into<CliError>> Context<T> for Result<T, E> {
    fn context(self, what: impl Into<String>) -> Result<T, CliError> {
        self.map_err(|e| CliError::Context { context: what.into(), source: Box::new(e.into()) })
    }
}

#[derive(Debug, Parser)]
#[command(name = "kronlab", version, about = "Kronecker sets, spectral measures and Gaussian flows")]
pub struct Cli {
    #[arg(long, env = "KRONLAB_SEED", default_value_t = 0, global = true)]
    pub seed: u64,
    #[arg(long, default_value_t = crate::numkit::DEFAULT_PRECISION, global = true)]
    pub precision_bits: usize,
    #[arg(long, value_enum, default_value_t = TierArg::Numeric, global = true)]
    pub tier: TierArg,
    /// Output file (a directory for `scenario run`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; scenarios run their assertions in parallel when above 1.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TierArg {
    Symbolic,
    Numeric,
}

impl From<TierArg> for Tier {
    fn from(t: TierArg) -> Self {
        match t {
            TierArg::Symbolic => Tier::Symbolic,
            TierArg::Numeric => Tier::Numeric,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rational independence of a finite set of reals.
    Qindep(QindepArgs),
    /// Expand a finitely generated multiplicative group and check it.
    Group(GroupArgs),
    #[command(subcommand)]
    Measure(MeasureCmd),
    #[command(subcommand)]
    Kron(KronCmd),
    #[command(subcommand)]
    Flow(FlowCmd),
    #[command(subcommand)]
    Scenario(ScenarioCmd),
    /// Convert measures among JSON, text and CSV atom lists.
    Convert(ConvertArgs),
}

#[derive(Debug, Args)]
pub struct QindepArgs {
    /// Values: canonical symbolic text or numeric expressions.
    pub values: Vec<String>,
    /// JSON array of values, or one value per line.
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    pub max_coeff: u64,
}

#[derive(Debug, Args)]
pub struct GroupArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub generators: Vec<String>,
    #[arg(long)]
    pub radius: u32,
    #[arg(long, default_value_t = 10_000)]
    pub max_coeff: u64,
}

#[derive(Debug, Subcommand)]
pub enum MeasureCmd {
    Scale { #[arg(long)] measure: PathBuf, #[arg(long, allow_hyphen_values = true)] by: String },
    Translate { #[arg(long)] measure: PathBuf, #[arg(long, allow_hyphen_values = true)] by: String },
    Symmetrize { #[arg(long)] measure: PathBuf },
    Mix {
        #[arg(long = "measure", required = true)]
        measures: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        weights: Vec<String>,
    },
    Restrict {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, allow_hyphen_values = true)]
        hi: f64,
    },
    /// The transform `t -> integral exp(2 pi i t x) d sigma(x)`.
    Bochner {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        t: Vec<f64>,
    },
    /// Truncated weak distance on `[lo, hi]`.
    Distance {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long, default_value_t = MetricConfig::DEFAULT_DEPTH)]
        depth: usize,
    },
    Singular { #[arg(long)] a: PathBuf, #[arg(long)] b: PathBuf },
    /// Whether `a` is absolutely continuous with respect to `b`.
    Acont { #[arg(long)] a: PathBuf, #[arg(long)] b: PathBuf },
    /// Self-similarity scales, and the support overlap under `--scale`.
    Selfsim {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        scale: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct SolveBudget {
    #[arg(long, value_enum, default_value_t = MethodArg::Lattice)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 100_000_000)]
    pub grid_evaluations: u64,
    #[arg(long, default_value_t = 10_000)]
    pub lattice_attempts: u64,
}

impl SolveBudget {
    fn options(&self) -> SolveOptions {
        let method = match self.method {
            MethodArg::Grid => Method::Grid,
            MethodArg::Lattice => Method::Lattice,
        };
        SolveOptions { method, grid_evaluations: self.grid_evaluations, lattice_attempts: self.lattice_attempts }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Grid,
    Lattice,
}

#[derive(Debug, Subcommand)]
pub enum KronCmd {
    /// Find `t` with `exp(2 pi i t x_j)` close to `exp(2 pi i phase_j)`.
    Solve {
        /// JSON array of points.
        #[arg(long)]
        points: PathBuf,
        /// JSON array of phases in `[0, 1)`.
        #[arg(long)]
        phases: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        t_min: f64,
        #[command(flatten)]
        budget: SolveBudget,
    },
    /// A Dirichlet witness over the atoms of a measure.
    Rigidity {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        t_min: f64,
        #[command(flatten)]
        budget: SolveBudget,
    },
    BuildSet {
        /// JSON array of rational targets.
        #[arg(long)]
        targets: PathBuf,
        #[arg(long)]
        delta: String,
        /// `{"generators": [...], "radius": r}`; the trivial group when absent.
        #[arg(long)]
        group: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        max_coeff: u64,
        #[arg(long, default_value_t = 10)]
        max_rounds: usize,
    },
    /// Random-phase trials over the atoms of a measure.
    Verify {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        t_min: f64,
        #[command(flatten)]
        budget: SolveBudget,
    },
    /// Weak convergence of `xi_{s t}` to targets `const:C`, `char:U` or `affine:C1:C2:U`.
    Weak {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long = "scale", required = true, allow_hyphen_values = true)]
        scales: Vec<f64>,
        #[arg(long = "target", required = true, allow_hyphen_values = true)]
        targets: Vec<String>,
        /// Times `1, 2, ..., t_max`.
        #[arg(long, default_value_t = 200)]
        t_max: usize,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0.25,0.5,0.75")]
        freqs: Vec<f64>,
        #[arg(long, default_value_t = 0.01)]
        tol: f64,
    },
    /// Points `h^{2i} q_i` near the targets.
    Korner {
        #[arg(long, allow_hyphen_values = true)]
        h: String,
        #[arg(long)]
        targets: PathBuf,
        #[arg(long)]
        delta: String,
        /// Symbol values, `name=expr`.
        #[arg(long = "assign")]
        assign: Vec<String>,
    },
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[arg(long)]
    pub measure: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t0: f64,
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long, default_value_t = 1000)]
    pub paths: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SampleFormat {
    Csv,
    Binary,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum FlowCmd {
    Simulate {
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long, value_enum, default_value_t = SampleFormat::Csv)]
        format: SampleFormat,
    },
    Autocov {
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        lags: Vec<f64>,
    },
    /// Paths of `X_{s t}` on the same grid.
    Rescale {
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long)]
        s: f64,
        #[arg(long, value_enum, default_value_t = SampleFormat::Csv)]
        format: SampleFormat,
    },
    /// Averaged periodogram on `lo, lo + df, ..., hi`.
    Spectrum {
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long, default_value_t = 0.0)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long)]
        df: f64,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[arg(long, default_value_t = 3)]
        peaks: usize,
    },
    /// `E|X_{u+t} - X_u|^2` against `tol * Var`; `t` from a Dirichlet witness unless given.
    Rigidity {
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 0.01)]
        tol: f64,
    },
    GaussTest {
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum ScenarioCmd {
    Run {
        name: String,
        /// `key=value` overrides.
        #[arg(long = "param")]
        params: Vec<String>,
        /// Include wall-clock timings in the report.
        #[arg(long)]
        timings: bool,
    },
    List,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    #[arg(long, value_enum)]
    pub from: Option<Format>,
    #[arg(long, value_enum)]
    pub to: Option<Format>,
    /// Reject duplicate CSV positions instead of merging them.
    #[arg(long)]
    pub strict: bool,
    /// Symbol values, `name=expr`; the result is numeric.
    #[arg(long = "assign")]
    pub assign: Vec<String>,
}

/// Parses `args` (program name first), runs the command and writes results
/// to `out` unless `--out` redirects them. Returns whether all checks passed.
pub fn run_with_args<I, T>(args: I, out: &mut dyn Write) -> Result<bool, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    run(&cli, out)
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<bool, CliError> {
    match cli.jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let mut buf = Vec::new();
            let pass = pool.install(|| dispatch(cli, &mut buf))?;
            out.write_all(&buf).map_err(|e| CliError::Io { path: "<stdout>".into(), message: e.to_string() })?;
            Ok(pass)
        }
        None => dispatch(cli, out),
    }
}

/// Entry point for the binary.
pub fn main_entry() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(&cli, &mut lock) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

struct Ctx<'a> {
    tier: Tier,
    prec: usize,
    seed: u64,
    out_path: Option<&'a PathBuf>,
}

impl Ctx<'_> {
    fn bounds(&self, max_coeff: u64) -> Bounds {
        Bounds { max_coeff, precision_bits: self.prec }
    }

    fn real(&self, text: &str) -> Result<Real, CliError> {
        Ok(Real::parse(text, self.tier, self.prec).context(format!("value `{text}`"))?)
    }

    fn emit_json(&self, value: &impl Serialize, out: &mut dyn Write) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Parse(e.to_string()))?;
        text.push('\n');
        self.emit_bytes(text.as_bytes(), out)
    }

    fn emit_bytes(&self, bytes: &[u8], out: &mut dyn Write) -> Result<(), CliError> {
        match self.out_path {
            Some(p) => io::write_file(p, bytes),
            None => out.write_all(bytes).map_err(|e| CliError::Io { path: "<stdout>".into(), message: e.to_string() }),
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<bool, CliError> {
    let ctx = Ctx { tier: cli.tier.into(), prec: cli.precision_bits, seed: cli.seed, out_path: cli.out.as_ref() };
    match &cli.command {
        Command::Qindep(a) => cmd_qindep(&ctx, a, out),
        Command::Group(a) => cmd_group(&ctx, a, out),
        Command::Measure(m) => cmd_measure(&ctx, m, out),
        Command::Kron(k) => cmd_kron(&ctx, k, out),
        Command::Flow(f) => cmd_flow(&ctx, f, out),
        Command::Scenario(ScenarioCmd::List) => {
            ctx.emit_json(&SCENARIOS, out)?;
            Ok(true)
        }
        Command::Scenario(ScenarioCmd::Run { name, params, timings }) => {
            let mut cfg = ScenarioConfig::new(name, cli.out.clone());
            cfg.parameters.insert("seed".into(), cli.seed.to_string());
            for p in params {
                let (k, v) = p.split_once('=').ok_or_else(|| CliError::Usage(format!("--param `{p}` is not key=value")))?;
                cfg.parameters.insert(k.trim().to_string(), v.trim().to_string());
            }
            cfg.timings = *timings;
            cfg.jobs = cli.jobs.unwrap_or(1);
            cfg.precision_bits = cli.precision_bits;
            let report = run_scenario(&cfg)?;
            let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Parse(e.to_string()))?;
            text.push('\n');
            out.write_all(text.as_bytes()).map_err(|e| CliError::Io { path: "<stdout>".into(), message: e.to_string() })?;
            Ok(report.pass)
        }
        Command::Convert(a) => {
            let assignment = io::parse_assignment(&a.assign, ctx.prec)?;
            let warnings = convert(&a.input, &a.output, a.from, a.to, ctx.tier, a.strict, &assignment)?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            Ok(true)
        }
    }
}

fn cmd_qindep(ctx: &Ctx, a: &QindepArgs, out: &mut dyn Write) -> Result<bool, CliError> {
    let mut texts = a.values.clone();
    if let Some(f) = &a.file {
        texts.extend(io::load_value_list(f)?);
    }
    let xs = texts.iter().map(|t| ctx.real(t)).collect::<Result<Vec<_>, _>>()?;
    let verdict = qindep::check_q_independence(&xs, ctx.bounds(a.max_coeff))?;
    ctx.emit_json(&verdict, out)?;
    Ok(true)
}

fn cmd_group(ctx: &Ctx, a: &GroupArgs, out: &mut dyn Write) -> Result<bool, CliError> {
    let gens = a.generators.iter().map(|t| ctx.real(t)).collect::<Result<Vec<_>, _>>()?;
    let slice = qindep::expand_group(&gens, a.radius)?;
    let verdict = qindep::check_group_independence(&slice, ctx.bounds(a.max_coeff))?;
    ctx.emit_json(&json!({ "slice": slice, "verdict": verdict }), out)?;
    Ok(true)
}

fn load(ctx: &Ctx, path: &PathBuf) -> Result<sm::Measure, CliError> {
    read_measure(path, None, ctx.tier, false).map(|(m, _)| m)
}

/// A scalar in the measure's tier.
fn scalar_for(m: &sm::Measure, text: &str, prec: usize) -> Result<Real, CliError> {
    Ok(Real::parse(text, m.tier(), prec).context(format!("value `{text}`"))?)
}

fn cmd_measure(ctx: &Ctx, cmd: &MeasureCmd, out: &mut dyn Write) -> Result<bool, CliError> {
    let emit_measure = |m: &sm::Measure, out: &mut dyn Write| {
        let mut text = m.to_json_string();
        text.push('\n');
        ctx.emit_bytes(text.as_bytes(), out)
    };
    match cmd {
        MeasureCmd::Scale { measure, by } => {
            let m = load(ctx, measure)?;
            emit_measure(&sm::scale_measure(&m, &scalar_for(&m, by, ctx.prec)?)?, out)?;
        }
        MeasureCmd::Translate { measure, by } => {
            let m = load(ctx, measure)?;
            emit_measure(&sm::translate_measure(&m, &scalar_for(&m, by, ctx.prec)?)?, out)?;
        }
        MeasureCmd::Symmetrize { measure } => emit_measure(&sm::symmetrize(&load(ctx, measure)?)?, out)?,
        MeasureCmd::Mix { measures, weights } => {
            let ms = measures.iter().map(|p| load(ctx, p)).collect::<Result<Vec<_>, _>>()?;
            let ws = weights.iter().map(|w| parse_rational(w)).collect::<Result<Vec<_>, _>>()?;
            emit_measure(&sm::mix(&ms, &ws)?, out)?;
        }
        MeasureCmd::Restrict { measure, lo, hi } => emit_measure(&sm::restrict(&load(ctx, measure)?, *lo, *hi)?, out)?,
        MeasureCmd::Bochner { measure, t } => {
            let m = load(ctx, measure)?;
            let rows = t
                .iter()
                .map(|&t| sm::bochner(&m, t).map(|z| json!({ "t": t, "re": z.re, "im": z.im })))
                .collect::<Result<Vec<_>, _>>()?;
            ctx.emit_json(&rows, out)?;
        }
        MeasureCmd::Distance { a, b, lo, hi, depth } => {
            let cfg = MetricConfig { a: *lo, b: *hi, depth: *depth };
            let d = sm::weak_distance(&load(ctx, a)?, &load(ctx, b)?, &cfg)?;
            ctx.emit_json(&json!({ "distance": d, "config": cfg }), out)?;
        }
        MeasureCmd::Singular { a, b } => ctx.emit_json(&sm::singularity_test(&load(ctx, a)?, &load(ctx, b)?), out)?,
        MeasureCmd::Acont { a, b } => {
            let (ma, mb) = (load(ctx, a)?, load(ctx, b)?);
            ctx.emit_json(&json!({ "absolutely_continuous": sm::abs_continuity_test(&ma, &mb) }), out)?;
        }
        MeasureCmd::Selfsim { measure, scale } => {
            let m = load(ctx, measure)?;
            let scales: Vec<String> = sm::self_similarity_scales(&m)?.iter().map(sm::Position::canonical).collect();
            let overlap = match scale {
                Some(s) => {
                    let v = scalar_for(&m, s, ctx.prec)?.to_f64(&Default::default())?;
                    Some(sm::overlap_fraction(&m, v)?)
                }
                None => None,
            };
            ctx.emit_json(&json!({ "scales": scales, "overlap": overlap }), out)?;
        }
    }
    Ok(true)
}

fn parse_weak_target(text: &str) -> Result<WeakTarget, CliError> {
    let bad = || CliError::Parse(format!("weak target `{text}`: expected const:C, char:U or affine:C1:C2:U"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let (kind, rest) = text.split_once(':').ok_or_else(bad)?;
    let parts: Vec<&str> = rest.split(':').collect();
    match (kind, parts.as_slice()) {
        ("const", [c]) => Ok(WeakTarget::Constant(Complex64::new(num(c)?, 0.0))),
        ("char", [u]) => Ok(WeakTarget::Character(num(u)?)),
        ("affine", [c1, c2, u]) => Ok(WeakTarget::Affine {
            c1: Complex64::new(num(c1)?, 0.0),
            c2: Complex64::new(num(c2)?, 0.0),
            u: num(u)?,
        }),
        _ => Err(bad()),
    }
}

fn cmd_kron(ctx: &Ctx, cmd: &KronCmd, out: &mut dyn Write) -> Result<bool, CliError> {
    match cmd {
        KronCmd::Solve { points, phases, eps, t_min, budget } => {
            let xs = io::load_value_list(points)?
                .iter()
                .map(|t| Ok(crate::numkit::expr::eval_expr(t, ctx.prec).context(format!("point `{t}`"))?))
                .collect::<Result<Vec<_>, CliError>>()?;
            let ph = io::load_f64_list(phases)?;
            let target = UnimodularTarget::new(xs, ph)?;
            let result = kronecker::solve_kronecker_approx(&target, *eps, *t_min, &budget.options())?;
            emit_approximation(ctx, &result, out)
        }
        KronCmd::Rigidity { measure, eps, t_min, budget } => {
            let m = load(ctx, measure)?;
            let result = kronecker::rigidity_witness(&m, *eps, *t_min, &budget.options())?;
            emit_approximation(ctx, &result, out)
        }
        KronCmd::BuildSet { targets, delta, group, max_coeff, max_rounds } => {
            let ys = io::load_value_list(targets)?.iter().map(|t| parse_rational(t)).collect::<Result<Vec<_>, _>>()?;
            let delta = parse_rational(delta)?;
            let slice = match group {
                Some(g) => io::load_group(g, ctx.tier, ctx.prec)?,
                None => qindep::GroupSlice::trivial(ctx.tier),
            };
            let cfg = kronecker::BuildConfig {
                bounds: ctx.bounds(*max_coeff),
                seed: ctx.seed,
                max_rounds: *max_rounds,
                ..Default::default()
            };
            let spec = kronecker::build_kronecker_points(&ys, &delta, &slice, &cfg)?;
            let mut j = spec.to_json();
            j["realized"] = json!(spec.realized.iter().map(Real::canonical).collect::<Vec<_>>());
            ctx.emit_json(&j, out)?;
            Ok(true)
        }
        KronCmd::Verify { measure, trials, eps, t_min, budget } => {
            let m = load(ctx, measure)?;
            let r = kronecker::verify_kronecker_property(&m, *trials, *eps, *t_min, &budget.options(), ctx.seed)?;
            ctx.emit_json(&r, out)?;
            Ok(r.successes == r.trials)
        }
        KronCmd::Weak { measure, scales, targets, t_max, freqs, tol } => {
            let m = load(ctx, measure)?;
            let gs = targets.iter().map(|t| parse_weak_target(t)).collect::<Result<Vec<_>, _>>()?;
            let ts: Vec<f64> = (1..=*t_max).map(|n| n as f64).collect();
            let r = kronecker::weak_convergence_check(&m, scales, &gs, &ts, freqs, *tol)?;
            ctx.emit_json(&r, out)?;
            Ok(true)
        }
        KronCmd::Korner { h, targets, delta, assign } => {
            let h = ctx.real(h)?;
            let ys = io::load_value_list(targets)?.iter().map(|t| ctx.real(t)).collect::<Result<Vec<_>, _>>()?;
            let assignment = io::parse_assignment(assign, ctx.prec)?;
            let k = kronecker::korner_points(&h, &ys, &parse_rational(delta)?, &assignment)?;
            ctx.emit_json(&k.to_json(), out)?;
            Ok(true)
        }
    }
}

fn emit_approximation(ctx: &Ctx, result: &kronecker::Approximation, out: &mut dyn Write) -> Result<bool, CliError> {
    ctx.emit_json(result, out)?;
    Ok(result.is_found())
}

fn process(ctx: &Ctx, f: &FlowArgs) -> Result<ProcessSpec, CliError> {
    let m = load(ctx, &f.measure)?;
    Ok(ProcessSpec::new(m, Grid { t0: f.t0, step: f.step, count: f.count }, f.paths, ctx.seed))
}

fn emit_sample(ctx: &Ctx, s: &PathSample, format: SampleFormat, out: &mut dyn Write) -> Result<(), CliError> {
    let mut buf = Vec::new();
    match format {
        SampleFormat::Csv => gaussflow::write_csv(s, &mut buf)?,
        SampleFormat::Binary => gaussflow::write_binary(s, &mut buf)?,
        SampleFormat::Json => {
            return ctx.emit_json(
                &json!({ "times": s.times, "scale": s.scale, "seed": s.spec.seed, "values": s.values }),
                out,
            )
        }
    }
    ctx.emit_bytes(&buf, out)
}

fn cmd_flow(ctx: &Ctx, cmd: &FlowCmd, out: &mut dyn Write) -> Result<bool, CliError> {
    match cmd {
        FlowCmd::Simulate { flow, format } => {
            let s = gaussflow::simulate(&process(ctx, flow)?)?;
            emit_sample(ctx, &s, *format, out)?;
            Ok(true)
        }
        FlowCmd::Autocov { flow, lags } => {
            let s = gaussflow::simulate(&process(ctx, flow)?)?;
            let r = gaussflow::empirical_autocovariance(&s, lags)?;
            let within = r.within(3.0);
            let pass = within.iter().all(|&w| w);
            ctx.emit_json(&json!({ "report": r, "within_3_stderr": within }), out)?;
            Ok(pass)
        }
        FlowCmd::Rescale { flow, s, format } => {
            let sample = gaussflow::rescale_paths(&gaussflow::simulate(&process(ctx, flow)?)?, *s)?;
            emit_sample(ctx, &sample, *format, out)?;
            Ok(true)
        }
        FlowCmd::Spectrum { flow, lo, hi, df, s, peaks } => {
            if !(*df > 0.0 && hi > lo) {
                return Err(CliError::Usage("need --df > 0 and --hi > --lo".into()));
            }
            let base = gaussflow::simulate(&process(ctx, flow)?)?;
            let sample = gaussflow::rescale_paths(&base, *s)?;
            let n = ((hi - lo) / df).round() as usize;
            let grid: Vec<f64> = (0..=n).map(|k| lo + k as f64 * df).collect();
            let pts = gaussflow::spectral_estimate(&sample, &grid)?;
            let top = gaussflow::strongest_peaks(&pts, *peaks);
            ctx.emit_json(&json!({ "peaks": top, "points": pts }), out)?;
            Ok(true)
        }
        FlowCmd::Rigidity { flow, t, eps, tol } => {
            let spec = process(ctx, flow)?;
            let t_w = match t {
                Some(t) => *t,
                None => match kronecker::rigidity_witness(&spec.spectral, *eps, 1.0, &SolveOptions::default())? {
                    kronecker::Approximation::Found(w) => w.t,
                    kronecker::Approximation::NotFound { best, .. } => {
                        return Err(CliError::Usage(format!(
                            "no witness at eps {eps}; best residual {}",
                            best.max_residual
                        )))
                    }
                },
            };
            let r = gaussflow::rigidity_check(&gaussflow::simulate(&spec)?, t_w, *tol)?;
            ctx.emit_json(&r, out)?;
            Ok(r.pass && r.agrees)
        }
        FlowCmd::GaussTest { flow, alpha } => {
            let r = gaussflow::gaussianity_test(&gaussflow::simulate(&process(ctx, flow)?)?, *alpha)?;
            ctx.emit_json(&r, out)?;
            Ok(r.pass)
        }
    }
}
