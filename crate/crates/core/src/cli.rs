//! `mhbound` command-line interface.
//!
//! Single-point queries print JSON to stdout; sweeps write one CSV per panel
//! plus a `<panel>.manifest.json` describing how to regenerate it.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{
    cost_strategy_a, cost_strategy_b, k_opt, mh_bound, CostMode, CostWeights, StatePair,
};
use crate::cascade::{noisy_probabilities, CascadeParams, NoiseModel};
use crate::error::Error;
use crate::montecarlo::{simulate, TrialConfig, RNG_ALGORITHM};
use crate::optimizer::{
    max_violation, minimize_cost, noise_threshold, sweep, NoiseChannel, OptimizerConfig,
    ThresholdGrid, ViolationRecord,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;

/// Environment variable holding the default output directory for sweeps.
pub const OUT_DIR_ENV: &str = "MHBOUND_OUT_DIR";

/// Column order of every θ/k sweep CSV.
pub const SWEEP_COLUMNS: [&str; 8] = [
    "theta", "k", "c_mh", "c_min", "delta", "p_dp", "p_m", "mode",
];

/// Column order of the max-violation (θ-only) panels.
pub const PEAK_COLUMNS: [&str; 11] = [
    "theta",
    "p_dp",
    "p_m",
    "k_opt",
    "k_star",
    "c_mh",
    "c_min",
    "delta_max",
    "s",
    "phi1",
    "phi2",
];

#[derive(Debug, Parser)]
#[command(
    name = "mhbound",
    version,
    about = "Modified Helstrom bound and optimal cascaded measurements"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Projective costs and the modified Helstrom bound at one point
    Bound(BoundArgs),
    /// Optimal cascaded measurement at one point
    Optimize(OptimizeArgs),
    /// Grid sweeps behind the figure panels, or a custom grid
    Sweep(SweepArgs),
    /// Noise strength at which the violation disappears
    Threshold(ThresholdArgs),
    /// Monte Carlo run of the game, compared against the exact probabilities
    Simulate(SimulateArgs),
    /// Regenerate a sweep from its manifest
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Absolute,
    Scaled,
}

impl From<ModeArg> for CostMode {
    fn from(m: ModeArg) -> CostMode {
        match m {
            ModeArg::Absolute => CostMode::Absolute,
            ModeArg::Scaled => CostMode::Scaled,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["w", "d"])]
    pub k: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "d")]
    pub w: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "w")]
    pub d: Option<f64>,
    #[arg(long, value_enum, default_value = "absolute")]
    pub mode: ModeArg,
    /// Read angles in degrees
    #[arg(long)]
    pub degrees: bool,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub k: f64,
    #[arg(long, value_enum, default_value = "absolute")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub p_dp: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub p_m: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Evaluation cap per simplex run
    #[arg(long)]
    pub max_evals: Option<usize>,
    #[arg(long)]
    pub degrees: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Figure {
    Fig1a,
    Fig1b,
    Fig1c,
    Fig1d,
    Fig1e,
    Fig1f,
    Fig1g,
    Fig1h,
    Fig2a,
    Fig2b,
    Fig2c,
    Fig2d,
    All,
}

impl Figure {
    const PANELS: [Figure; 12] = [
        Figure::Fig1a,
        Figure::Fig1b,
        Figure::Fig1c,
        Figure::Fig1d,
        Figure::Fig1e,
        Figure::Fig1f,
        Figure::Fig1g,
        Figure::Fig1h,
        Figure::Fig2a,
        Figure::Fig2b,
        Figure::Fig2c,
        Figure::Fig2d,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Figure::Fig1a => "fig1a",
            Figure::Fig1b => "fig1b",
            Figure::Fig1c => "fig1c",
            Figure::Fig1d => "fig1d",
            Figure::Fig1e => "fig1e",
            Figure::Fig1f => "fig1f",
            Figure::Fig1g => "fig1g",
            Figure::Fig1h => "fig1h",
            Figure::Fig2a => "fig2a",
            Figure::Fig2b => "fig2b",
            Figure::Fig2c => "fig2c",
            Figure::Fig2d => "fig2d",
            Figure::All => "all",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    /// Predefined figure panel (or `all`)
    #[arg(long, value_enum, conflicts_with_all = ["thetas", "ks", "k_grid"])]
    pub figure: Option<Figure>,
    /// Comma-separated separation angles for a custom grid
    #[arg(long)]
    pub thetas: Option<String>,
    /// Comma-separated k values for a custom grid
    #[arg(long, conflicts_with = "k_grid")]
    pub ks: Option<String>,
    /// `start:stop:count`, inclusive and evenly spaced
    #[arg(long)]
    pub k_grid: Option<String>,
    #[arg(long, value_enum, default_value = "absolute")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub p_dp: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub p_m: f64,
    /// File stem for a custom grid
    #[arg(long, default_value = "custom")]
    pub name: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub degrees: bool,
    #[serde(skip)]
    #[arg(long, env = OUT_DIR_ENV, default_value = "mhbound-out")]
    pub out_dir: PathBuf,
    /// Worker threads; results do not depend on it
    #[serde(skip)]
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelArg {
    Depolarize,
    Misidentify,
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdArgs {
    #[arg(long, value_enum)]
    pub channel: ChannelArg,
    /// 10-point θ grid instead of 50 (faster, about ±0.01)
    #[arg(long)]
    pub coarse: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub phi1: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub phi2: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub s: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub p_dp: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub p_m: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Independent RNG streams the trials are split over
    #[arg(long, default_value_t = 8)]
    pub workers: usize,
    #[arg(long)]
    pub degrees: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RerunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Where to write the regenerated files (defaults to the manifest's directory)
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// Everything needed to regenerate one sweep output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command_line: Vec<String>,
    pub seed: u64,
    pub panel: String,
    pub grid: GridSpec,
    pub noise: Vec<NoiseModel>,
    pub mode: Option<CostMode>,
    pub sweep: SweepArgs,
    pub output: String,
    pub timestamp_unix: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    pub thetas: Vec<f64>,
    pub ks: Vec<f64>,
}

/// Failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn io(e: impl std::fmt::Display) -> Self {
        CliError {
            code: 1,
            message: e.to_string(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match &e {
            Error::InvalidArgument { name, reason } => {
                CliError::usage(format!("invalid --{}: {reason}", name.replace('_', "-")))
            }
            _ => CliError {
                code: 1,
                message: e.to_string(),
            },
        }
    }
}

/// Entry point used by `main`: parses, runs, reports errors, returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let command_line = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(cli, command_line, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

/// Runs a parsed command; returns the exit code for non-error outcomes
/// (0, or 3 when the optimizer did not converge).
pub fn run(cli: Cli, command_line: Vec<String>, out: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Bound(a) => emit(out, &cmd_bound(&a)?).map(|_| EXIT_OK),
        Command::Optimize(a) => {
            let (value, converged) = cmd_optimize(&a)?;
            emit(out, &value)?;
            Ok(if converged {
                EXIT_OK
            } else {
                EXIT_NON_CONVERGENCE
            })
        }
        Command::Sweep(a) => {
            let value = with_jobs(a.jobs, || cmd_sweep(&a, &command_line))??;
            emit(out, &value).map(|_| EXIT_OK)
        }
        Command::Threshold(a) => {
            let value = with_jobs(a.jobs, || cmd_threshold(&a))??;
            emit(out, &value).map(|_| EXIT_OK)
        }
        Command::Simulate(a) => emit(out, &cmd_simulate(&a)?).map(|_| EXIT_OK),
        Command::Rerun(a) => {
            let value = cmd_rerun(&a)?;
            emit(out, &value).map(|_| EXIT_OK)
        }
    }
}

fn emit(out: &mut dyn Write, value: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(CliError::io)?;
    writeln!(out, "{text}").map_err(CliError::io)
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(CliError::usage("invalid --jobs: must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(CliError::io)?;
            Ok(pool.install(f))
        }
    }
}

/// Formats `x` with 9 significant digits, like C's `%.9g`.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..9).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rounds to 9 significant digits so JSON output carries the same precision as CSV.
pub fn round9(x: f64) -> f64 {
    if x.is_finite() {
        sig9(x).parse().expect("sig9 output parses")
    } else {
        x
    }
}

fn angle_in(value: f64, degrees: bool) -> f64 {
    if degrees {
        value.to_radians()
    } else {
        value
    }
}

pub fn cmd_bound(a: &BoundArgs) -> Result<Value, CliError> {
    let pair = StatePair::new(angle_in(a.theta, a.degrees))?;
    let weights = match (a.k, a.w, a.d) {
        (Some(k), None, None) => CostWeights::normalized(k, a.mode.into())?,
        (None, Some(w), Some(d)) => CostWeights::new(w, d, a.mode.into())?,
        _ => return Err(CliError::usage("give either --k or both --w and --d")),
    };
    let (c_a, _) = cost_strategy_a(&pair, &weights);
    let (c_b, _) = cost_strategy_b(&pair, &weights);
    let (c_mh, winner) = mh_bound(&pair, &weights);
    Ok(json!({
        "theta": round9(pair.theta()),
        "w": round9(weights.w()),
        "d": round9(weights.d()),
        "k": weights.k().map(round9),
        "mode": weights.mode().as_str(),
        "c_a": round9(c_a),
        "c_b": round9(c_b),
        "c_mh": round9(c_mh),
        "winning_strategy": winner.variant.as_str(),
        "basis_angle": round9(winner.basis_angle),
        "k_opt": round9(k_opt(pair.theta())),
        "helstrom": round9(pair.helstrom()),
    }))
}

pub fn cmd_optimize(a: &OptimizeArgs) -> Result<(Value, bool), CliError> {
    let pair = StatePair::new(angle_in(a.theta, a.degrees))?;
    let weights = CostWeights::normalized(a.k, a.mode.into())?;
    let noise = NoiseModel::new(a.p_dp, a.p_m)?;
    let mut config = OptimizerConfig::default().with_seed(a.seed);
    if let Some(cap) = a.max_evals {
        if cap == 0 {
            return Err(CliError::usage("invalid --max-evals: must be at least 1"));
        }
        config.nelder_mead.max_evaluations = cap;
    }
    let (c_mh, _) = mh_bound(&pair, &weights);
    let r = minimize_cost(&pair, &weights, &noise, &config);
    let value = json!({
        "theta": round9(pair.theta()),
        "k": round9(a.k),
        "mode": weights.mode().as_str(),
        "p_dp": round9(noise.p_dp),
        "p_m": round9(noise.p_m),
        "seed": a.seed,
        "c_mh": round9(c_mh),
        "c_min": round9(r.best_cost),
        "delta": round9(c_mh - r.best_cost),
        "phi1": round9(r.best_params.phi1),
        "phi2": round9(r.best_params.phi2),
        "s": round9(r.best_params.s),
        "restarts_agreeing": r.restarts_agreeing,
        "evaluations": r.evaluations,
        "converged": r.converged,
    });
    Ok((value, r.converged))
}

/// Separation angles of the Fig. 1 panels: π/10 steps up to π/2.
pub fn fig1_thetas() -> Vec<f64> {
    (1..=5).map(|i| i as f64 * PI / 10.0).collect()
}

/// 200 evenly spaced values in (0, 1].
pub fn fig1_ks() -> Vec<f64> {
    (1..=200).map(|i| i as f64 / 200.0).collect()
}

/// 100 evenly spaced angles in (0, π/2].
pub fn fig2_thetas() -> Vec<f64> {
    (1..=100).map(|i| i as f64 * FRAC_PI_2 / 100.0).collect()
}

struct Panel {
    name: String,
    kind: PanelKind,
}

enum PanelKind {
    Grid {
        thetas: Vec<f64>,
        ks: Vec<f64>,
        noise: NoiseModel,
        mode: CostMode,
    },
    Peak {
        thetas: Vec<f64>,
        noises: Vec<NoiseModel>,
    },
}

fn figure_panel(fig: Figure) -> Panel {
    let grid = |noise: NoiseModel, mode: CostMode| PanelKind::Grid {
        thetas: fig1_thetas(),
        ks: fig1_ks(),
        noise,
        mode,
    };
    let abs = CostMode::Absolute;
    let scaled = CostMode::Scaled;
    let kind = match fig {
        Figure::Fig1a | Figure::Fig1c => grid(NoiseModel::IDEAL, abs),
        Figure::Fig1b | Figure::Fig1d => grid(NoiseModel::IDEAL, scaled),
        Figure::Fig1e => grid(NoiseModel::depolarizing(0.05), abs),
        Figure::Fig1f => grid(NoiseModel::depolarizing(0.05), scaled),
        Figure::Fig1g => grid(NoiseModel::misidentifying(0.02), abs),
        Figure::Fig1h => grid(NoiseModel::misidentifying(0.02), scaled),
        Figure::Fig2a => PanelKind::Peak {
            thetas: fig2_thetas(),
            noises: (0..=5)
                .map(|i| NoiseModel::depolarizing(0.02 * i as f64))
                .collect(),
        },
        Figure::Fig2b => PanelKind::Peak {
            thetas: fig2_thetas(),
            noises: (0..=4)
                .map(|i| NoiseModel::misidentifying(0.01 * i as f64))
                .collect(),
        },
        Figure::Fig2c | Figure::Fig2d => PanelKind::Peak {
            thetas: fig2_thetas(),
            noises: vec![NoiseModel::IDEAL, NoiseModel::misidentifying(0.02)],
        },
        Figure::All => unreachable!("expanded by the caller"),
    };
    Panel {
        name: fig.name().to_string(),
        kind,
    }
}

/// Parses a comma-separated list of numbers.
pub fn parse_list(flag: &str, text: &str) -> Result<Vec<f64>, CliError> {
    let values = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::usage(format!("invalid --{flag}: {e}")))?;
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::usage(format!(
            "invalid --{flag}: need finite numbers"
        )));
    }
    Ok(values)
}

/// Parses `start:stop:count` into an inclusive evenly spaced grid.
pub fn parse_range(flag: &str, text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || {
        CliError::usage(format!(
            "invalid --{flag}: expected start:stop:count, got {text:?}"
        ))
    };
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, count] = parts[..] else {
        return Err(bad());
    };
    let start: f64 = start.trim().parse().map_err(|_| bad())?;
    let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
    let count: usize = count.trim().parse().map_err(|_| bad())?;
    if count == 0 || !start.is_finite() || !stop.is_finite() || (count == 1 && start != stop) {
        return Err(bad());
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

fn custom_panel(a: &SweepArgs) -> Result<Panel, CliError> {
    let thetas = a
        .thetas
        .as_deref()
        .ok_or_else(|| CliError::usage("give --figure or --thetas with --ks/--k-grid"))?;
    let thetas: Vec<f64> = parse_list("thetas", thetas)?
        .into_iter()
        .map(|t| angle_in(t, a.degrees))
        .collect();
    let ks = match (&a.ks, &a.k_grid) {
        (Some(list), None) => parse_list("ks", list)?,
        (None, Some(range)) => parse_range("k-grid", range)?,
        _ => return Err(CliError::usage("give exactly one of --ks or --k-grid")),
    };
    for &t in &thetas {
        StatePair::new(t)?;
    }
    let mode: CostMode = a.mode.into();
    for &k in &ks {
        CostWeights::normalized(k, mode)?;
    }
    if a.name.is_empty() || a.name.contains(['/', '\\']) {
        return Err(CliError::usage("invalid --name: must be a plain file stem"));
    }
    Ok(Panel {
        name: a.name.clone(),
        kind: PanelKind::Grid {
            thetas,
            ks,
            noise: NoiseModel::new(a.p_dp, a.p_m)?,
            mode,
        },
    })
}

fn sweep_csv(records: &[ViolationRecord]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_COLUMNS).map_err(CliError::io)?;
    for r in records {
        w.write_record([
            sig9(r.theta),
            sig9(r.k),
            sig9(r.c_mh),
            sig9(r.c_min),
            sig9(r.delta),
            sig9(r.noise.p_dp),
            sig9(r.noise.p_m),
            r.mode.as_str().to_string(),
        ])
        .map_err(CliError::io)?;
    }
    w.into_inner().map_err(CliError::io)
}

fn peak_csv(
    thetas: &[f64],
    noises: &[NoiseModel],
    config: &OptimizerConfig,
) -> Result<Vec<u8>, CliError> {
    use rayon::prelude::*;
    let tasks: Vec<(usize, NoiseModel, f64)> = noises
        .iter()
        .flat_map(|n| thetas.iter().map(move |&t| (*n, t)))
        .enumerate()
        .map(|(i, (n, t))| (i, n, t))
        .collect();
    let peaks = tasks
        .par_iter()
        .map(|(i, n, t)| max_violation(*t, n, &config.for_task(*i as u64)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(PEAK_COLUMNS).map_err(CliError::io)?;
    for ((_, noise, theta), m) in tasks.iter().zip(&peaks) {
        w.write_record([
            sig9(*theta),
            sig9(noise.p_dp),
            sig9(noise.p_m),
            sig9(k_opt(*theta)),
            sig9(m.k_star),
            sig9(m.c_mh),
            sig9(m.c_min),
            sig9(m.delta_max),
            sig9(m.params.s),
            sig9(m.params.phi1),
            sig9(m.params.phi2),
        ])
        .map_err(CliError::io)?;
    }
    w.into_inner().map_err(CliError::io)
}

fn write_panel(
    panel: &Panel,
    args: &SweepArgs,
    command_line: &[String],
    out_dir: &Path,
) -> Result<Value, CliError> {
    let config = OptimizerConfig::default().with_seed(args.seed);
    let (bytes, grid, noise, mode, rows) = match &panel.kind {
        PanelKind::Grid {
            thetas,
            ks,
            noise,
            mode,
        } => {
            let records = sweep(thetas, ks, noise, *mode, &config)?;
            (
                sweep_csv(&records)?,
                GridSpec {
                    thetas: thetas.clone(),
                    ks: ks.clone(),
                },
                vec![*noise],
                Some(*mode),
                records.len(),
            )
        }
        PanelKind::Peak { thetas, noises } => (
            peak_csv(thetas, noises, &config)?,
            GridSpec {
                thetas: thetas.clone(),
                ks: Vec::new(),
            },
            noises.clone(),
            Some(CostMode::Absolute),
            thetas.len() * noises.len(),
        ),
    };

    fs::create_dir_all(out_dir).map_err(CliError::io)?;
    let csv_name = format!("{}.csv", panel.name);
    let csv_path = out_dir.join(&csv_name);
    fs::write(&csv_path, &bytes).map_err(CliError::io)?;

    // the manifest regenerates exactly this panel
    let mut own_args = args.clone();
    if args.figure == Some(Figure::All) {
        own_args.figure = Figure::PANELS
            .iter()
            .copied()
            .find(|f| f.name() == panel.name);
    }
    let manifest = RunManifest {
        tool: "mhbound".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command_line: command_line.to_vec(),
        seed: args.seed,
        panel: panel.name.clone(),
        grid,
        noise,
        mode,
        sweep: own_args,
        output: csv_name,
        timestamp_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    let manifest_path = out_dir.join(format!("{}.manifest.json", panel.name));
    let text = serde_json::to_string_pretty(&manifest).map_err(CliError::io)?;
    fs::write(&manifest_path, text + "\n").map_err(CliError::io)?;

    Ok(json!({
        "panel": panel.name,
        "csv": csv_path.display().to_string(),
        "manifest": manifest_path.display().to_string(),
        "rows": rows,
    }))
}

pub fn cmd_sweep(a: &SweepArgs, command_line: &[String]) -> Result<Value, CliError> {
    let panels = match a.figure {
        Some(Figure::All) => Figure::PANELS.iter().map(|&f| figure_panel(f)).collect(),
        Some(f) => vec![figure_panel(f)],
        None => vec![custom_panel(a)?],
    };
    let written = panels
        .iter()
        .map(|p| write_panel(p, a, command_line, &a.out_dir))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(json!({ "seed": a.seed, "outputs": written }))
}

pub fn cmd_rerun(a: &RerunArgs) -> Result<Value, CliError> {
    let text = fs::read_to_string(&a.manifest)
        .map_err(|e| CliError::usage(format!("invalid --manifest: {e}")))?;
    let manifest: RunManifest = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("invalid --manifest: {e}")))?;
    let mut args = manifest.sweep.clone();
    args.out_dir = match &a.out_dir {
        Some(dir) => dir.clone(),
        None => a
            .manifest
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    args.jobs = a.jobs;
    let command_line = manifest.command_line.clone();
    with_jobs(a.jobs, || cmd_sweep(&args, &command_line))?
}

pub fn cmd_threshold(a: &ThresholdArgs) -> Result<Value, CliError> {
    let channel = match a.channel {
        ChannelArg::Depolarize => NoiseChannel::Depolarize,
        ChannelArg::Misidentify => NoiseChannel::Misidentify,
    };
    let grid = if a.coarse {
        ThresholdGrid::coarse()
    } else {
        ThresholdGrid::default()
    };
    let config = OptimizerConfig::default().with_seed(a.seed);
    let r = noise_threshold(channel, &grid, &config)?;
    Ok(json!({
        "channel": channel.as_str(),
        "threshold": round9(r.threshold),
        "bracket": [round9(r.bracket.0), round9(r.bracket.1)],
        "theta_at_peak": round9(r.theta_at_peak),
        "flagged": r.flagged,
        "coarse_thetas": grid.coarse_thetas,
        "seed": a.seed,
    }))
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<Value, CliError> {
    let pair = StatePair::new(angle_in(a.theta, a.degrees))?;
    let params = CascadeParams::new(
        angle_in(a.phi1, a.degrees),
        angle_in(a.phi2, a.degrees),
        a.s,
    )?;
    let noise = NoiseModel::new(a.p_dp, a.p_m)?;
    if a.trials == 0 {
        return Err(CliError::usage("invalid --trials: must be at least 1"));
    }
    if a.workers == 0 {
        return Err(CliError::usage("invalid --workers: must be at least 1"));
    }
    let config = TrialConfig {
        pair,
        params,
        noise,
        trials: a.trials,
        seed: a.seed,
        workers: a.workers,
    };
    let tally = simulate(&config);
    let exact = noisy_probabilities(&pair, &params, &noise);
    let z = tally.z_scores(&exact);
    let max_abs_z = z.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let triple =
        |p: [f64; 3]| json!({ "p_c": round9(p[0]), "p_w": round9(p[1]), "p_d": round9(p[2]) });
    Ok(json!({
        "theta": round9(pair.theta()),
        "phi1": round9(params.phi1),
        "phi2": round9(params.phi2),
        "s": round9(params.s),
        "p_dp": round9(noise.p_dp),
        "p_m": round9(noise.p_m),
        "trials": a.trials,
        "seed": a.seed,
        "workers": a.workers,
        "rng": RNG_ALGORITHM,
        "counts": {
            "correct": tally.counts.n_correct,
            "wrong": tally.counts.n_wrong,
            "decline": tally.counts.n_decline,
        },
        "estimates": triple(tally.estimates.as_array()),
        "std_errors": tally.std_errors.map(round9),
        "analytic": triple(exact.as_array()),
        "z_scores": z.map(round9),
        "max_abs_z": round9(max_abs_z),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_formatting() {
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(-0.0), "0");
        assert_eq!(sig9(0.146_446_609_406_726_27), "0.146446609");
        assert_eq!(sig9(1.0), "1");
        assert_eq!(sig9(0.005), "0.005");
        assert_eq!(sig9(1.5e-7), "1.5e-7");
        assert_eq!(sig9(-2.345_678_912_3e-3), "-0.00234567891");
        assert_eq!(sig9(123_456_789_012.0), "1.23456789e11");
        assert_eq!(sig9(0.999_999_999_9), "1");
    }

    #[test]
    fn range_parsing() {
        assert_eq!(parse_range("k-grid", "0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_range("k-grid", "0.2:0.2:1").unwrap(), vec![0.2]);
        for bad in ["", "1:2", "a:b:c", "0:1:0", "0:1:1", "0:1:2:3"] {
            assert_eq!(parse_range("k-grid", bad).unwrap_err().code, EXIT_USAGE);
        }
        assert_eq!(parse_list("ks", "0.1, 0.2").unwrap(), vec![0.1, 0.2]);
        assert!(parse_list("ks", "0.1,,0.2").is_err());
        assert!(parse_list("ks", "nan").is_err());
    }

    #[test]
    fn figure_defaults() {
        let t = fig1_thetas();
        assert_eq!(t.len(), 5);
        assert!((t[4] - FRAC_PI_2).abs() < 1e-15);
        let k = fig1_ks();
        assert_eq!((k.len(), k[0], k[199]), (200, 0.005, 1.0));
        assert_eq!(fig2_thetas().len(), 100);
        match figure_panel(Figure::Fig1f).kind {
            PanelKind::Grid { noise, mode, .. } => {
                assert_eq!(noise, NoiseModel::depolarizing(0.05));
                assert_eq!(mode, CostMode::Scaled);
            }
            PanelKind::Peak { .. } => panic!("fig1f is a grid panel"),
        }
        match figure_panel(Figure::Fig2b).kind {
            PanelKind::Peak { noises, .. } => {
                assert_eq!(noises.len(), 5);
                assert_eq!(noises[4], NoiseModel::misidentifying(0.04));
            }
            PanelKind::Grid { .. } => panic!("fig2b is a peak panel"),
        }
    }

    #[test]
    fn invalid_argument_names_the_flag() {
        let e: CliError = Error::invalid("p_dp", "too big").into();
        assert_eq!(e.code, EXIT_USAGE);
        assert!(e.message.contains("--p-dp"));
    }
}
