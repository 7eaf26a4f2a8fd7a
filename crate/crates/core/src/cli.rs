//! The `curve-thickness` command line.
//!
//! Every subcommand prints one JSON document `{"manifest": ..., "report": ...}`
//! (or writes it to `--out`). Exit codes: 0 ok, 2 invalid input, 3 numeric
//! failure (oracle bracket miss, exhausted smoothing ladder).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bounds::{class_count_bound, BoundsError};
use crate::curve::{CurveError, DiscreteCurve};
use crate::defaults;
use crate::fixtures;
use crate::io::{self, IoError, TidyTable};
use crate::isotopy::{isotopy_check_with_frames, suggested_rho, IsotopyError, DEFAULT_FRAMES};
use crate::kernel::{thickness_with_oracles, KernelError, NormalSampleSpec, OracleChoice};
use crate::patch::{
    angular_profile_surface, smoothing_ladder, LadderConfig, PatchError, Profile, DEFAULT_MAX_HALVINGS,
};
use crate::semicontinuity::{run_experiment, PerturbationFamily, PerturbationSpec, SemicontinuityError};
use crate::tighten::{tighten, TightenConfig, TightenError};

#[derive(Debug, Parser, Serialize)]
#[command(name = "curve-thickness", version, about = "Thickness of closed curves in R^n")]
pub struct Cli {
    /// Worker threads (0 = one per core). THICKNESS_THREADS overrides this.
    #[arg(long, global = true, default_value_t = defaults::THREADS)]
    pub threads: usize,
    /// Write the JSON document here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Command {
    /// Thickness min(F_g, MDC/2) with optional oracle cross-checks.
    Thickness(ThicknessArgs),
    /// Thickness and MDC along a shrinking perturbation sequence.
    Semicontinuity(SemicontinuityArgs),
    /// Smooth a curve to a larger focal distance within a C¹ budget.
    Smooth(SmoothArgs),
    /// Normal-projection isotopy check between two curves.
    Isotopy(IsotopyArgs),
    /// A-priori isotopy-class bounds.
    Bounds(BoundsArgs),
    /// Ropelength descent at fixed length.
    Tighten(TightenArgs),
    /// Write a fixture curve or patch.
    Fixtures(FixtureArgs),
    /// Print the table of numeric defaults.
    Defaults,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleArg {
    None,
    Ball,
    Cut,
    Both,
}

#[derive(Debug, Args, Serialize)]
pub struct ThicknessArgs {
    /// Curve file (.json or .csv).
    pub curve: PathBuf,
    #[arg(long, value_enum, default_value_t = OracleArg::None)]
    pub oracle: OracleArg,
    /// Normal directions per vertex for the oracles (default by dimension).
    #[arg(long)]
    pub directions: Option<usize>,
    /// Per-vertex curvature table.
    #[arg(long)]
    pub plot_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    Radial,
    Tangential,
    Mixed,
}

#[derive(Debug, Args, Serialize)]
pub struct SemicontinuityArgs {
    pub curve: PathBuf,
    #[arg(long, value_enum, default_value_t = FamilyArg::Radial)]
    pub family: FamilyArg,
    #[arg(long, default_value_t = defaults::SEMICONTINUITY_FREQUENCY)]
    pub frequency: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Term j has amplitude coefficient / j (fraction of thickness).
    #[arg(long, default_value_t = defaults::SEMICONTINUITY_COEFFICIENT)]
    pub coefficient: f64,
    #[arg(long, default_value_t = defaults::SEMICONTINUITY_TERMS)]
    pub terms: usize,
    /// Explicit comma-separated schedule, replacing coefficient / j.
    #[arg(long, value_delimiter = ',')]
    pub amplitudes: Option<Vec<f64>>,
    #[arg(long, default_value_t = defaults::SEMICONTINUITY_TAIL)]
    pub tail: f64,
    #[arg(long, default_value_t = defaults::SEMICONTINUITY_BAND_REL)]
    pub band_rel: f64,
    /// One row per term.
    #[arg(long)]
    pub plot_csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SmoothArgs {
    pub curve: PathBuf,
    #[arg(long)]
    pub r1: f64,
    #[arg(long)]
    pub r2: f64,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_HALVINGS)]
    pub max_halvings: u32,
    /// Where to write the smoothed curve.
    #[arg(long)]
    pub out_curve: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct IsotopyArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    /// Projection radius; defaults to thickness(a) / 8.
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_FRAMES)]
    pub frames: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundsArgs {
    /// Ambient dimension.
    #[arg(long)]
    pub n: u32,
    /// Submanifold dimension.
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// Thickness lower bound.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    /// Print the table instead of JSON.
    #[arg(long)]
    pub table: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct TightenArgs {
    pub curve: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub step_scale: Option<f64>,
    #[arg(long)]
    pub cooling: Option<f64>,
    #[arg(long)]
    pub temperature: Option<f64>,
    /// JSON-lines trace, one record per step.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub out_curve: Option<PathBuf>,
    /// step, objective, thickness, accepted per step.
    #[arg(long)]
    pub plot_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixtureName {
    Circle,
    Ellipse,
    Stadium,
    RoundedSquare,
    Concentric,
    Trefoil,
    PerturbedCircle,
    RandomTrig,
    AngularProfile,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileArg {
    Constant,
    Spike,
}

#[derive(Debug, Args, Serialize)]
pub struct FixtureArgs {
    #[arg(value_enum)]
    pub name: FixtureName,
    /// Vertex count; for angular-profile the spike slope (even).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Semi-axes of the ellipse.
    #[arg(long, default_value_t = 2.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Flat length of the stadium or rounded square.
    #[arg(long, default_value_t = 4.0)]
    pub flat: f64,
    /// Outer radius and vertex count of the concentric pair.
    #[arg(long, default_value_t = 3.0)]
    pub outer_radius: f64,
    #[arg(long)]
    pub outer_n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[arg(long, default_value_t = 5)]
    pub degree: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, value_enum, default_value_t = ProfileArg::Spike)]
    pub profile: ProfileArg,
    /// Constant profile value.
    #[arg(long, default_value_t = 1.0)]
    pub value: f64,
    /// Patch half-width and nodes per axis (odd).
    #[arg(long, default_value_t = 1.0)]
    pub half: f64,
    #[arg(long, default_value_t = 201)]
    pub nodes: usize,
    /// Where to write the fixture (.json or .csv); stdout JSON otherwise.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

/// Everything needed to reproduce a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    /// Parsed arguments with every default filled in.
    pub parameters: serde_json::Value,
    pub defaults: Vec<defaults::DefaultEntry>,
    pub version: String,
    pub seed: Option<u64>,
    pub threads: usize,
    /// Not part of the reproducible content.
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub manifest: RunManifest,
    pub report: T,
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Numeric(m) => m,
        }
    }
}

fn validation<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Validation(e.to_string())
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        validation(e)
    }
}
impl From<CurveError> for CliError {
    fn from(e: CurveError) -> Self {
        validation(e)
    }
}
impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        match e {
            KernelError::BracketMiss { .. } => CliError::Numeric(e.to_string()),
            _ => validation(e),
        }
    }
}
impl From<PatchError> for CliError {
    fn from(e: PatchError) -> Self {
        match e {
            PatchError::LadderExhausted { .. } => CliError::Numeric(e.to_string()),
            _ => validation(e),
        }
    }
}
impl From<IsotopyError> for CliError {
    fn from(e: IsotopyError) -> Self {
        validation(e)
    }
}
impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        validation(e)
    }
}
impl From<TightenError> for CliError {
    fn from(e: TightenError) -> Self {
        match e {
            TightenError::Kernel(k) => k.into(),
            e => validation(e),
        }
    }
}
impl From<SemicontinuityError> for CliError {
    fn from(e: SemicontinuityError) -> Self {
        match e {
            SemicontinuityError::Kernel(k) => k.into(),
            e => validation(e),
        }
    }
}

/// Worker count: THICKNESS_THREADS, else `--threads`.
pub fn resolve_threads(flag: usize) -> Result<usize, CliError> {
    match std::env::var(defaults::THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("{}={v:?} is not a thread count", defaults::THREADS_ENV))),
        Err(_) => Ok(flag),
    }
}

/// Entry point of the binary; returns the exit code.
pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_from(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_from<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let threads = resolve_threads(cli.threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(validation)?;
    let start = Instant::now();
    match pool.install(|| dispatch(cli, threads))? {
        Output::Json(mut doc) => {
            doc["manifest"]["wall_time_s"] = start.elapsed().as_secs_f64().into();
            let text = serde_json::to_string_pretty(&doc).expect("reports serialize");
            match &cli.out {
                Some(p) => io::write_text(p, &text)?,
                None => writeln!(out, "{text}").map_err(validation)?,
            }
        }
        Output::Text(text) => write!(out, "{text}").map_err(validation)?,
    }
    Ok(())
}

fn manifest(cli: &Cli, name: &str, inputs: &[&Path], seed: Option<u64>, threads: usize) -> RunManifest {
    RunManifest {
        command: name.into(),
        inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
        parameters: serde_json::to_value(&cli.command).expect("arguments serialize"),
        defaults: defaults::table(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed,
        threads,
        wall_time_s: 0.0,
    }
}

fn envelope<T: Serialize>(manifest: RunManifest, report: &T) -> serde_json::Value {
    serde_json::json!({ "manifest": manifest, "report": report })
}

fn fmt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

enum Output {
    Json(serde_json::Value),
    Text(String),
}

fn dispatch(cli: &Cli, threads: usize) -> Result<Output, CliError> {
    let doc = match &cli.command {
        Command::Thickness(a) => {
            let curve = io::read_curve(&a.curve)?;
            let choice = match a.oracle {
                OracleArg::None => OracleChoice::None,
                OracleArg::Ball => OracleChoice::Ball,
                OracleArg::Cut => OracleChoice::Cut,
                OracleArg::Both => OracleChoice::Both,
            };
            let spec = match a.directions {
                Some(d) => {
                    let est = crate::kernel::thickness(&curve)?
                        .thickness
                        .finite()
                        .unwrap_or(curve.bbox_diagonal());
                    Some(NormalSampleSpec {
                        normal_directions_per_vertex: d,
                        ..NormalSampleSpec::around(curve.dim(), est)
                    })
                }
                None => None,
            };
            let report = thickness_with_oracles(&curve, choice, spec)?;
            if let Some(p) = &a.plot_csv {
                io::write_text(p, &io::curve_table(&curve).to_csv())?;
            }
            envelope(manifest(cli, "thickness", &[&a.curve], None, threads), &report)
        }
        Command::Semicontinuity(a) => {
            let curve = io::read_curve(&a.curve)?;
            let family = match a.family {
                FamilyArg::Radial => PerturbationFamily::RadialBumps { frequency: a.frequency },
                FamilyArg::Tangential => PerturbationFamily::TangentialNoise { seed: a.seed },
                FamilyArg::Mixed => PerturbationFamily::Mixed {
                    frequency: a.frequency,
                    seed: a.seed,
                },
            };
            let mut spec = PerturbationSpec::harmonic(family, a.coefficient, a.terms);
            if let Some(am) = &a.amplitudes {
                spec.amplitudes = am.clone();
            }
            spec.tail_fraction = a.tail;
            spec.band_rel = a.band_rel;
            let report = run_experiment(&curve, &spec)?;
            if let Some(p) = &a.plot_csv {
                let mut t = TidyTable::new(&["j", "amplitude", "thickness", "mdc", "hausdorff"]);
                for r in &report.terms {
                    t.push([
                        r.j.to_string(),
                        r.amplitude.to_string(),
                        r.thickness.to_string(),
                        fmt(r.mdc),
                        r.hausdorff.to_string(),
                    ]);
                }
                io::write_text(p, &t.to_csv())?;
            }
            envelope(
                manifest(cli, "semicontinuity", &[&a.curve], Some(a.seed), threads),
                &report,
            )
        }
        Command::Smooth(a) => {
            let curve = io::read_curve(&a.curve)?;
            let cfg = LadderConfig {
                max_halvings: a.max_halvings,
                ..LadderConfig::new(a.r1, a.r2, a.sigma)
            };
            let report = smoothing_ladder(&curve, &cfg)?;
            if let Some(p) = &a.out_curve {
                io::write_curve(p, report.curve())?;
            }
            envelope(manifest(cli, "smooth", &[&a.curve], None, threads), &report)
        }
        Command::Isotopy(a) => {
            let k = io::read_curve(&a.a)?;
            let l = io::read_curve(&a.b)?;
            let rho = match a.rho {
                Some(r) => r,
                None => suggested_rho(crate::kernel::thickness(&k)?.thickness)?,
            };
            let report = isotopy_check_with_frames(&k, &l, rho, a.frames)?;
            envelope(manifest(cli, "isotopy", &[&a.a, &a.b], None, threads), &report)
        }
        Command::Bounds(a) => {
            let report = class_count_bound(a.n, a.k, a.r, a.epsilon)?;
            if a.table {
                let rows = report.table_rows();
                let w = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                return Ok(Output::Text(
                    rows.iter().map(|(k, v)| format!("{k:w$}  {v}\n")).collect(),
                ));
            }
            envelope(manifest(cli, "bounds", &[], None, threads), &report)
        }
        Command::Tighten(a) => {
            let curve = io::read_curve(&a.curve)?;
            let d = TightenConfig::default();
            let cfg = TightenConfig {
                seed: a.seed.unwrap_or(d.seed),
                steps: a.steps.unwrap_or(d.steps),
                step_scale: a.step_scale.unwrap_or(d.step_scale),
                cooling: a.cooling.unwrap_or(d.cooling),
                temperature: a.temperature.unwrap_or(d.temperature),
                ..d
            };
            let trace = tighten(&curve, &cfg)?;
            if let Some(p) = &a.trace {
                let mut buf = Vec::new();
                trace.write_jsonl(&mut buf).map_err(validation)?;
                io::write_text(p, &String::from_utf8(buf).expect("JSON is UTF-8"))?;
            }
            if let Some(p) = &a.out_curve {
                io::write_curve(p, trace.final_curve())?;
            }
            if let Some(p) = &a.plot_csv {
                let mut t = TidyTable::new(&["step", "objective", "thickness", "accepted"]);
                for r in &trace.records {
                    t.push([
                        r.step.to_string(),
                        r.objective.to_string(),
                        r.thickness.to_string(),
                        r.accepted.to_string(),
                    ]);
                }
                io::write_text(p, &t.to_csv())?;
            }
            let mut m = manifest(cli, "tighten", &[&a.curve], Some(cfg.seed), threads);
            m.parameters["resolved"] = serde_json::to_value(&cfg).expect("serialize");
            let mut doc = envelope(m, &trace);
            // the per-step records live in the trace file
            doc["report"]["records"] = serde_json::Value::Array(Vec::new());
            doc["report"]["final_curve"] =
                serde_json::to_value(io::CurveFile::from(trace.final_curve())).expect("serialize");
            doc
        }
        Command::Fixtures(a) => {
            let report = fixture(a)?;
            match (&report, &a.file) {
                (FixtureOut::Curve(c), Some(p)) => io::write_curve(p, c)?,
                (FixtureOut::Patch(patch), Some(p)) => {
                    io::write_text(p, &serde_json::to_string(patch).expect("patches serialize"))?
                }
                _ => {}
            }
            let value = match &report {
                FixtureOut::Curve(c) => serde_json::to_value(io::CurveFile::from(c)),
                FixtureOut::Patch(p) => serde_json::to_value(p),
            }
            .expect("fixtures serialize");
            envelope(manifest(cli, "fixtures", &[], Some(a.seed), threads), &value)
        }
        Command::Defaults => {
            return Ok(Output::Text(defaults::render()));
        }
    };
    Ok(Output::Json(doc))
}

enum FixtureOut {
    Curve(DiscreteCurve),
    Patch(crate::patch::GraphPatch),
}

fn fixture(a: &FixtureArgs) -> Result<FixtureOut, CliError> {
    let n = |default: usize| -> Result<usize, CliError> {
        let n = a.n.unwrap_or(default);
        if n < 4 {
            return Err(CliError::Validation(format!("--n {n}: need at least 4 vertices")));
        }
        Ok(n)
    };
    let positive = |name: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(CliError::Validation(format!("--{name} must be positive, got {v}")))
        }
    };
    Ok(FixtureOut::Curve(match a.name {
        FixtureName::Circle => fixtures::circle_in(a.dim.max(2), n(1000)?, positive("radius", a.radius)?),
        FixtureName::Ellipse => fixtures::ellipse(positive("a", a.a)?, positive("b", a.b)?, n(4000)?),
        FixtureName::Stadium => fixtures::stadium(positive("radius", a.radius)?, positive("flat", a.flat)?, n(2000)?),
        FixtureName::RoundedSquare => {
            fixtures::rounded_square(positive("flat", a.flat)?, positive("radius", a.radius)?, n(2000)?)
        }
        FixtureName::Concentric => {
            let (r1, r2) = (positive("radius", a.radius)?, positive("outer-radius", a.outer_radius)?);
            if r2 <= r1 {
                return Err(CliError::Validation("--outer-radius must exceed --radius".into()));
            }
            let n1 = n(1000)?;
            fixtures::concentric(r1, r2, n1, a.outer_n.unwrap_or(n1 * 3).max(4))
        }
        FixtureName::Trefoil => fixtures::trefoil(n(600)?),
        FixtureName::PerturbedCircle => {
            if !(a.noise >= 0.0 && a.noise < 0.5) {
                return Err(CliError::Validation("--noise must lie in [0, 0.5)".into()));
            }
            fixtures::perturbed_circle(a.seed, n(400)?, a.noise)
        }
        FixtureName::RandomTrig => {
            if a.dim < 2 {
                return Err(CliError::Validation("--dim must be at least 2".into()));
            }
            fixtures::random_trig_curve(a.seed, a.degree.max(1), n(2000)?, a.dim)
        }
        FixtureName::AngularProfile => {
            let profile = match a.profile {
                ProfileArg::Spike => Profile::Spike {
                    n: a.n.unwrap_or(8) as u32,
                },
                ProfileArg::Constant => Profile::Constant { value: a.value },
            };
            return Ok(FixtureOut::Patch(angular_profile_surface(
                profile,
                positive("half", a.half)?,
                a.nodes,
            )?));
        }
    }))
}
