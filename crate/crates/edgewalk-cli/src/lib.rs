//! Command-line front end: argument and config-file parsing, validation and
//! dispatch to the experiments of [`edgewalk::harness`].
//!
//! Settings are resolved with precedence flags > config file > defaults. A
//! config file holds flat `key = value` lines; `#` starts a comment.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::error::{ContextKind, ContextValue, ErrorKind};
use clap::{Args, Parser, Subcommand, ValueEnum};
use edgewalk::chains::{InvariantLaws, DEFAULT_TAIL_EPS};
use edgewalk::harness::{self, BarrierKind, ExperimentReport, Suite};
use edgewalk::meso::{check_eps_tilde, eps_tilde_bound};
use edgewalk::reflect::{limit_env_sequence, LimitEnvConfig, LimitSequence};
use edgewalk::rng;
use edgewalk::walk_core::{phi, SimConfig, TrajectoryRecord, WeightFunction};

const DEFAULT_SEED: u64 = 1;
const DEFAULT_BIG_N: u64 = 2000;
const DEFAULT_THETA: f64 = 1.0;
const DEFAULT_EPS: f64 = 0.25;
const DEFAULT_GRID: usize = 1 << 12;
const DEFAULT_TRAJECTORY_LEGS: usize = 4;
const DEFAULT_ENUMERATION_K: usize = 12;
const MAX_ENUMERATION_K: usize = 16;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// `--help` or `--version` output; not a failure.
    #[error("{0}")]
    Help(String),
    #[error("usage error: `{key}`: {message}")]
    Usage { key: String, message: String },
    #[error("run failed (master seed {seed}): {source}")]
    Run { seed: u64, source: edgewalk::Error },
    #[error("cannot access {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Help(_) => 0,
            CliError::Usage { .. } => 2,
            CliError::Run { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }

    fn usage(key: &str, message: impl Into<String>) -> Self {
        CliError::Usage {
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn from_library(e: edgewalk::Error) -> Self {
        match e {
            edgewalk::Error::Config { key, reason } => CliError::Usage { key, message: reason },
            other => CliError::Usage {
                key: "config".into(),
                message: other.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WalkExperiment {
    /// Anchored trajectory dump: k, T_k, X_{T_k}, Z_k.
    Trajectory,
    /// Median T_0 / N^2 against 4 theta^2.
    Hitting,
    /// Edge local-time profile against the triangle.
    Profile,
    /// KS distance of X_n / sqrt(n) from uniform on [-1, 1].
    Uniform,
    /// Log-log slope of the first mesoscopic waiting time.
    Exponent,
    /// Increment variance rate of the environment profile.
    EnvVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChainsExperiment {
    /// Optimal coupling mismatch against total variation.
    Coupling,
    /// Monotone sandwich of shared-uniform chains.
    Sandwich,
    /// Ledger identities and per-site chain recursion.
    Ledger,
    /// Structure of the invariant laws.
    Rho,
    /// Dump of the three invariant laws.
    Laws,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReflectExperiment {
    /// Forward and backward absorption probabilities.
    Absorption,
    /// Atom check on the limit waiting time.
    Atoms,
    /// Step recursion against the running-maximum formula.
    Equivalence,
    /// Dump of K steps of the limit process.
    Sequence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MesoExperiment {
    /// Window probability floor.
    Window,
    /// Walk increments against the limit process.
    Increments,
    /// Closeness of the symmetric and reflected chain sums.
    Symmetric,
    /// Frequency of short mesoscopic schedules.
    Tlower,
    /// Exhaustive admissible-sequence checks up to K.
    Enumerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BarrierArg {
    Brownian,
    Zero,
    QuarticRoot,
    Linear,
    All,
}

impl BarrierArg {
    fn kinds(self) -> Vec<BarrierKind> {
        match self {
            BarrierArg::Brownian => vec![BarrierKind::Brownian],
            BarrierArg::Zero => vec![BarrierKind::Zero],
            BarrierArg::QuarticRoot => vec![BarrierKind::QuarticRoot],
            BarrierArg::Linear => vec![BarrierKind::Linear],
            BarrierArg::All => BarrierKind::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Exact,
    Statistical,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Exact => Suite::Exact,
            SuiteArg::Statistical => Suite::Statistical,
        }
    }
}

/// Settings shared by every subcommand; unset values fall back to the
/// config file, then to the defaults.
#[derive(Debug, Clone, Default, Args)]
struct CommonArgs {
    /// Master seed [default: 1]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Replications [default: per experiment]
    #[arg(long, global = true)]
    reps: Option<u32>,
    /// Mesoscopic scale n [default: floor(N^(2/3))]
    #[arg(long, global = true)]
    n: Option<u64>,
    /// Macroscopic scale N [default: 2000]
    #[arg(long = "N", global = true)]
    big_n: Option<u64>,
    /// Anchor level theta [default: 1]
    #[arg(long, global = true)]
    theta: Option<f64>,
    /// Mesoscopic step fraction eps [default: 0.25]
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Window fraction [default: half the admissible bound]
    #[arg(long = "eps-tilde", global = true)]
    eps_tilde: Option<f64>,
    /// Grid nodes per unit time of continuous paths [default: 4096]
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Number of mesoscopic legs or limit steps [default: per experiment]
    #[arg(long = "K", global = true)]
    k: Option<usize>,
    /// Output file [default: stdout]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads [default: all cores]
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output format [default: json]
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Flat key = value config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Simulate the walk.
    Walk {
        #[arg(long, value_enum, default_value = "trajectory")]
        experiment: WalkExperiment,
    },
    /// Auxiliary chains, invariant laws and couplings.
    Chains {
        #[arg(long, value_enum, default_value = "coupling")]
        experiment: ChainsExperiment,
    },
    /// Reflection, absorption and the limit process.
    Reflect {
        #[arg(long, value_enum, default_value = "absorption")]
        experiment: ReflectExperiment,
        /// Barrier family for the absorption experiment
        #[arg(long, value_enum, default_value = "all")]
        barrier: BarrierArg,
    },
    /// Mesoscopic coarse-graining checks.
    Meso {
        #[arg(long, value_enum, default_value = "window")]
        experiment: MesoExperiment,
    },
    /// Run an acceptance suite with default parameters.
    Verify {
        #[arg(long, value_enum, default_value = "exact")]
        suite: SuiteArg,
    },
}

#[derive(Debug, Parser)]
#[command(name = "edgewalk", version, about = "Directed-edge self-repelling walk simulator")]
struct Cli {
    #[command(subcommand)]
    command: Option<Sub>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Walk(WalkExperiment),
    Chains(ChainsExperiment),
    Reflect { experiment: ReflectExperiment, barrier: BarrierArg },
    Meso(MesoExperiment),
    Verify(SuiteArg),
}

/// Values set by a flag or the config file. `None` means the experiment's
/// own default applies.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub reps: Option<u32>,
    pub n: Option<u64>,
    pub big_n: Option<u64>,
    pub theta: Option<f64>,
    pub eps: Option<f64>,
    pub eps_tilde: Option<f64>,
    pub grid: Option<usize>,
    pub k: Option<usize>,
}

/// A fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandSpec {
    pub command: Command,
    pub overrides: Overrides,
    pub seed: u64,
    pub eps_tilde: f64,
    pub grid: usize,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub format: Format,
}

/// Keys accepted in a config file.
pub const CONFIG_KEYS: [&str; 12] = [
    "seed", "reps", "n", "N", "theta", "eps", "eps_tilde", "grid", "K", "out", "threads", "format",
];

/// Parses flat `key = value` lines. Unknown and repeated keys are errors.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::usage("config", format!("line {}: expected key = value", i + 1)))?;
        let key = k.trim().replace('-', "_");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(CliError::usage(&key, "unknown config key"));
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::usage(&key, "repeated config key"));
        }
    }
    Ok(out)
}

fn parse_value<T: std::str::FromStr>(file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, CliError> {
    file.get(key)
        .map(|v| v.parse::<T>().map_err(|_| CliError::usage(key, format!("cannot parse `{v}`"))))
        .transpose()
}

fn clap_error(e: clap::Error) -> CliError {
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            CliError::Help(e.render().to_string())
        }
        _ => {
            let key = match e.get(ContextKind::InvalidArg) {
                Some(ContextValue::String(s)) => s.split_whitespace().next().unwrap_or(s).to_string(),
                _ => "argv".to_string(),
            };
            let message = e.render().to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            CliError::Usage { key, message }
        }
    }
}

/// Parses `argv` (program name first), merges the config file named by
/// `--config` and validates the result. Without a subcommand the help text
/// is returned as [`CliError::Help`].
pub fn parse_config<I, T>(argv: I) -> Result<(CommandSpec, SimConfig), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(clap_error)?;
    let Some(sub) = cli.command else {
        let mut cmd = <Cli as clap::CommandFactory>::command();
        return Err(CliError::Help(cmd.render_help().to_string()));
    };
    let file = match &cli.common.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| CliError::Io { path: p.clone(), source })?;
            parse_key_values(&text)?
        }
        None => BTreeMap::new(),
    };
    let command = match sub {
        Sub::Walk { experiment } => Command::Walk(experiment),
        Sub::Chains { experiment } => Command::Chains(experiment),
        Sub::Reflect { experiment, barrier } => Command::Reflect { experiment, barrier },
        Sub::Meso { experiment } => Command::Meso(experiment),
        Sub::Verify { suite } => Command::Verify(suite),
    };
    resolve(command, cli.common, &file)
}

fn resolve(command: Command, c: CommonArgs, file: &BTreeMap<String, String>) -> Result<(CommandSpec, SimConfig), CliError> {
    let overrides = Overrides {
        reps: c.reps.or(parse_value(file, "reps")?),
        n: c.n.or(parse_value(file, "n")?),
        big_n: c.big_n.or(parse_value(file, "N")?),
        theta: c.theta.or(parse_value(file, "theta")?),
        eps: c.eps.or(parse_value(file, "eps")?),
        eps_tilde: c.eps_tilde.or(parse_value(file, "eps_tilde")?),
        grid: c.grid.or(parse_value(file, "grid")?),
        k: c.k.or(parse_value(file, "K")?),
    };
    let seed = c.seed.or(parse_value(file, "seed")?).unwrap_or(DEFAULT_SEED);
    let threads = c.threads.or(parse_value(file, "threads")?);
    let out = c.out.or(parse_value(file, "out")?);
    let format = match c.format {
        Some(f) => f,
        None => match file.get("format").map(String::as_str) {
            None | Some("json") => Format::Json,
            Some("csv") => Format::Csv,
            Some(v) => return Err(CliError::usage("format", format!("expected json or csv, got `{v}`"))),
        },
    };

    if overrides.reps == Some(0) || overrides.reps.is_some_and(|r| r > harness::MAX_REPS) {
        return Err(CliError::usage("reps", format!("must lie in 1..={}", harness::MAX_REPS)));
    }
    if threads == Some(0) {
        return Err(CliError::usage("threads", "must be positive"));
    }
    if overrides.k == Some(0) {
        return Err(CliError::usage("K", "must be positive"));
    }
    let grid = overrides.grid.unwrap_or(DEFAULT_GRID);
    if grid < 2 {
        return Err(CliError::usage("grid", "needs at least two nodes per unit time"));
    }

    // An explicit n without N takes the smallest N with n <= N^(2/3).
    let big_n = match (overrides.big_n, overrides.n) {
        (Some(b), _) => b,
        (None, Some(n)) => ((n as f64).powf(1.5).ceil() as u64).max(1),
        (None, None) => DEFAULT_BIG_N,
    };
    if big_n == 0 {
        return Err(CliError::usage("N", "must be positive"));
    }
    let mut cfg = SimConfig::at_scale(big_n);
    cfg.n = overrides.n.unwrap_or_else(|| phi(big_n));
    cfg.theta = overrides.theta.unwrap_or(DEFAULT_THETA);
    cfg.eps = overrides.eps.unwrap_or(DEFAULT_EPS);
    cfg.seed = seed;
    cfg.validate().map_err(CliError::from_library)?;
    let eps_tilde = overrides.eps_tilde.unwrap_or_else(|| eps_tilde_bound(cfg.eps) / 2.0);
    check_eps_tilde(cfg.eps, eps_tilde).map_err(CliError::from_library)?;

    Ok((
        CommandSpec {
            command,
            overrides,
            seed,
            eps_tilde,
            grid,
            out,
            threads,
            format,
        },
        cfg,
    ))
}

/// What a command produced.
#[derive(Debug, Clone)]
pub enum Artifact {
    Reports(Vec<ExperimentReport>),
    Trajectory(TrajectoryRecord),
    Laws(InvariantLaws),
    Sequence(LimitSequence),
}

impl Artifact {
    /// True unless a gating criterion failed.
    pub fn passed(&self) -> bool {
        match self {
            Artifact::Reports(r) => r.iter().all(ExperimentReport::passed),
            _ => true,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match (self, format) {
            (Artifact::Reports(r), Format::Json) => {
                if let [one] = r.as_slice() {
                    one.to_json()
                } else {
                    serde_json::to_string_pretty(r).expect("reports serialize")
                }
            }
            (Artifact::Reports(r), Format::Csv) => harness::reports_to_csv(r),
            (Artifact::Trajectory(t), Format::Json) => t.to_json(),
            (Artifact::Trajectory(t), Format::Csv) => t.to_csv(),
            (Artifact::Laws(l), Format::Json) => serde_json::json!({
                "r2": l.r2(),
                "minus": l.minus.support().collect::<Vec<_>>(),
                "plus": l.plus.support().collect::<Vec<_>>(),
                "zero": l.zero.support().collect::<Vec<_>>(),
            })
            .to_string(),
            (Artifact::Laws(l), Format::Csv) => {
                let mut s = String::from("law,value,mass\n");
                for (name, law) in [("minus", &l.minus), ("plus", &l.plus), ("zero", &l.zero)] {
                    for (v, m) in law.support() {
                        let _ = writeln!(s, "{name},{v},{m:e}");
                    }
                }
                s
            }
            (Artifact::Sequence(q), Format::Json) => serde_json::to_string(q).expect("sequence serializes"),
            (Artifact::Sequence(q), Format::Csv) => {
                let mut s = String::from("k,Z_k,T_k,p_minus\n");
                for k in 0..q.z.len() {
                    let _ = writeln!(s, "{},{},{},{}", k + 1, q.z[k], q.t[k], q.p_minus[k]);
                }
                s
            }
        }
    }

    /// One line per criterion, for the terminal.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        if let Artifact::Reports(reports) = self {
            for r in reports {
                for c in &r.criteria {
                    let tag = match (c.passed, c.gating) {
                        (true, _) => "PASS",
                        (false, true) => "FAIL",
                        (false, false) => "WARN",
                    };
                    let _ = writeln!(s, "{tag} {}::{} = {:.6} ({})", r.experiment, c.name, c.statistic, c.rule);
                }
            }
        }
        s
    }
}

fn ns_around(n: u64, factors: &[f64]) -> Vec<u64> {
    factors.iter().map(|f| ((n as f64 * f).round() as u64).max(1)).collect()
}

fn laws_r2() -> edgewalk::Result<f64> {
    Ok(InvariantLaws::new(&WeightFunction::default(), DEFAULT_TAIL_EPS)?.r2())
}

/// Runs the command and returns its artifact without writing anything.
pub fn execute(spec: &CommandSpec, cfg: &SimConfig) -> Result<Artifact, CliError> {
    let run = || -> edgewalk::Result<Artifact> { dispatch(spec, cfg) };
    let result = match spec.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::usage("threads", e.to_string()))?
            .install(run),
        None => run(),
    };
    result.map_err(|source| match source {
        edgewalk::Error::Config { key, reason } => CliError::Usage { key, message: reason },
        source => CliError::Run { seed: spec.seed, source },
    })
}

fn dispatch(spec: &CommandSpec, cfg: &SimConfig) -> edgewalk::Result<Artifact> {
    let o = &spec.overrides;
    let seed = spec.seed;
    let one = |r: ExperimentReport| Artifact::Reports(vec![r]);
    Ok(match spec.command {
        Command::Walk(e) => match e {
            WalkExperiment::Trajectory => Artifact::Trajectory(harness::anchored_trajectory(
                cfg,
                o.k.unwrap_or(DEFAULT_TRAJECTORY_LEGS),
                &WeightFunction::default(),
            )?),
            WalkExperiment::Hitting => {
                let mut p = harness::HittingParams::default();
                if let Some(b) = o.big_n {
                    p.big_ns = vec![b];
                }
                p.theta = cfg.theta;
                p.reps = o.reps.unwrap_or(p.reps);
                one(harness::estimate_hitting_constant(&p, seed)?)
            }
            WalkExperiment::Profile => {
                let mut p = harness::ProfileParams::default();
                if let Some(b) = o.big_n {
                    p.big_ns = vec![b];
                }
                p.theta = cfg.theta;
                p.reps = o.reps.unwrap_or(p.reps);
                one(harness::triangle_profile_error(&p, seed)?)
            }
            WalkExperiment::Uniform => {
                let mut p = harness::UniformParams::default();
                p.n = o.n.unwrap_or(p.n);
                p.reps = o.reps.unwrap_or(p.reps);
                one(harness::uniform_limit_ks(&p, seed)?)
            }
            WalkExperiment::Exponent => {
                let mut p = harness::ExponentParams::default();
                if let Some(n) = o.n {
                    p.ns = ns_around(n, &[0.125, 0.25, 0.5, 1.0]);
                }
                p.eps = cfg.eps;
                p.reps = o.reps.unwrap_or(p.reps);
                one(harness::superdiffusive_exponent(&p, seed)?)
            }
            WalkExperiment::EnvVariance => {
                let mut p = harness::EnvVarianceParams::default();
                p.n = o.n.unwrap_or(p.n);
                p.eps = cfg.eps;
                p.reps = o.reps.unwrap_or(p.reps);
                one(harness::env_variance(&p, seed)?)
            }
        },
        Command::Chains(e) => match e {
            ChainsExperiment::Coupling => {
                let mut p = harness::CouplingParams::default();
                p.pairs = o.reps.unwrap_or(p.pairs);
                one(harness::coupling_optimality(&p, seed)?)
            }
            ChainsExperiment::Sandwich => {
                let mut p = harness::SandwichParams::default();
                p.chains = o.reps.unwrap_or(p.chains);
                one(harness::coupling_sandwich(&p, seed)?)
            }
            ChainsExperiment::Ledger => {
                let mut p = harness::LedgerParams::default();
                p.runs = o.reps.unwrap_or(p.runs);
                one(harness::ledger_identities(&p, seed)?)
            }
            ChainsExperiment::Rho => one(harness::rho_structure()?),
            ChainsExperiment::Laws => {
                Artifact::Laws(InvariantLaws::new(&WeightFunction::default(), DEFAULT_TAIL_EPS)?)
            }
        },
        Command::Reflect { experiment, barrier } => match experiment {
            ReflectExperiment::Absorption => {
                let mut p = harness::AbsorptionParams::default();
                p.kinds = barrier.kinds();
                p.reps = o.reps.map(u64::from).unwrap_or(p.reps);
                if o.eps.is_some() || o.grid.is_some() {
                    p.half_width = cfg.eps;
                    p.intervals = 2 * ((cfg.eps * spec.grid as f64).round() as usize).max(1);
                }
                one(harness::absorption_duality(&p, seed)?)
            }
            ReflectExperiment::Atoms => {
                let mut p = harness::AtomParams::default();
                p.samples = o.reps.unwrap_or(p.samples);
                p.limit.eps = cfg.eps;
                p.limit.nodes_per_unit = spec.grid;
                one(harness::limit_atoms(&p, seed)?)
            }
            ReflectExperiment::Equivalence => {
                let mut p = harness::ReflectionParams::default();
                p.instances = o.reps.unwrap_or(p.instances);
                one(harness::reflection_equivalence(&p, seed)?)
            }
            ReflectExperiment::Sequence => {
                let mut limit = LimitEnvConfig::new(cfg.eps, laws_r2()?);
                limit.nodes_per_unit = spec.grid;
                let mut g = rng::stream(seed, harness::stream_id(harness::streams::MESO_LIMIT, 0, 0));
                Artifact::Sequence(limit_env_sequence(o.k.unwrap_or(DEFAULT_TRAJECTORY_LEGS), &limit, &mut g)?)
            }
        },
        Command::Meso(e) => match e {
            MesoExperiment::Window => {
                let mut p = harness::WindowFloorParams::default();
                if let Some(n) = o.n {
                    p.ns = vec![n];
                }
                p.eps = cfg.eps;
                p.eps_tilde = spec.eps_tilde;
                p.windows = o.reps.unwrap_or(p.windows);
                one(harness::window_floor(&p, seed)?)
            }
            MesoExperiment::Increments => {
                let mut p = harness::MesoParams::default();
                p.n = o.n.unwrap_or(p.n);
                p.k_legs = o.k.unwrap_or(p.k_legs);
                p.eps = cfg.eps;
                p.limit.eps = cfg.eps;
                p.limit.nodes_per_unit = spec.grid;
                if let Some(r) = o.reps {
                    p.reps = r;
                    p.limit_reps = r;
                }
                one(harness::meso_increment_table(&p, seed)?)
            }
            MesoExperiment::Symmetric => {
                let mut p = harness::SymParams::default();
                if let Some(n) = o.n {
                    p.ns = ns_around(n, &[0.25, 1.0, 4.0]);
                    p.gate_n = p.ns[1];
                }
                p.eps = cfg.eps;
                p.reps = o.reps.unwrap_or(p.reps);
                one(harness::sym_closeness(&p, seed)?)
            }
            MesoExperiment::Tlower => {
                let mut p = harness::TLowerParams::default();
                p.n = o.n.unwrap_or(p.n);
                if let Some(k) = o.k {
                    p.ks = (1..=k).collect();
                }
                p.eps = cfg.eps;
                p.eps_tilde = spec.eps_tilde;
                p.reps = o.reps.unwrap_or(p.reps);
                one(harness::t_lowerbound_trend(&p, seed)?)
            }
            MesoExperiment::Enumerate => {
                let k = o.k.unwrap_or(DEFAULT_ENUMERATION_K);
                if k > MAX_ENUMERATION_K {
                    return Err(edgewalk::Error::Config {
                        key: "K".into(),
                        reason: format!("exhaustive enumeration is capped at K = {MAX_ENUMERATION_K}"),
                    });
                }
                one(harness::meso_combinatorics(k)?)
            }
        },
        Command::Verify(suite) => Artifact::Reports(harness::run_suite(suite.into(), seed)?),
    })
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Runs the command, writes its artifact and returns the exit code: 0 when
/// every gating criterion passed, 1 otherwise.
pub fn run_command(spec: &CommandSpec, cfg: &SimConfig) -> Result<i32, CliError> {
    let artifact = execute(spec, cfg)?;
    write_output(spec.out.as_deref(), &artifact.render(spec.format))?;
    eprint!("{}", artifact.summary());
    Ok(if artifact.passed() { 0 } else { 1 })
}
