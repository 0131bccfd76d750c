//! Command-line interface.
//!
//! Every subcommand validates its arguments before doing any work, writes
//! only to the paths it is given (or stdout), and embeds its full argument
//! set in the output so a run can be replayed.

mod commands;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::protocol::{Strategy, DEFAULT_GRID_STEP};
use crate::sector::{ChainSpec, PropagatorMode};

pub use commands::dispatch;

#[derive(Debug, Parser)]
#[command(
    name = "qudit-transfer",
    version,
    about = "Iterative perfect state transfer on d-level spin chains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the iterative protocol once and report every iteration.
    Simulate(SimulateArgs),
    /// Regenerate the probability, timing, distribution and failure tables.
    Sweep(SweepArgs),
    /// Fit a power law or a line to a two-column CSV.
    Fit(FitArgs),
    /// Cross-check the sector engine against the full Hilbert-space oracle.
    OracleCheck(OracleArgs),
    /// Expand the two-site swap as a polynomial in S·S.
    SwapCoefficients(SwapArgs),
    /// Receiver probability |F_N1(t)|² as a time series.
    Propagator(PropagatorArgs),
    /// Excitation distribution after a failed first measurement.
    Distribution(DistributionArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ChainArgs {
    /// Number of sites N.
    #[arg(long = "n", default_value_t = 20)]
    pub n: usize,
    /// Levels per site.
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Exchange coupling J.
    #[arg(long, default_value_t = 1.0)]
    pub j: f64,
    /// Magnetic field B.
    #[arg(long, default_value_t = 0.0)]
    pub b: f64,
}

impl ChainArgs {
    pub fn spec(&self) -> Result<ChainSpec> {
        ChainSpec::new(self.n, self.d, self.j, self.b)
    }
}

#[derive(Debug, Clone, Copy, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Spectral,
    Exact,
}

impl From<ModeArg> for PropagatorMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Spectral => PropagatorMode::Spectral,
            ModeArg::Exact => PropagatorMode::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyArg {
    Optimized,
    Regular,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Optimized => Strategy::Optimized,
            StrategyArg::Regular => Strategy::Regular,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TimingArgs {
    /// Time resolution of the optimisation grid (units of 1/J).
    #[arg(long, default_value_t = DEFAULT_GRID_STEP)]
    pub grid_step: f64,
    /// Upper end of the first-iteration window; defaults to 2N.
    #[arg(long)]
    pub first_window: Option<f64>,
    /// Upper end of the window for later iterations.
    #[arg(long, default_value_t = 10.0)]
    pub later_window: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = StrategyArg::Optimized)]
    pub strategy: StrategyArg,
    #[arg(long, default_value_t = 10)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Forced outcomes, one S or F per iteration; later iterations are sampled.
    #[arg(long)]
    pub force: Option<String>,
    /// Payload amplitudes a_1..a_{d-1} as `re,im;re,im;…` (normalised on
    /// input). Defaults to an equal superposition.
    #[arg(long)]
    pub payload: Option<String>,
    #[command(flatten)]
    pub timing: TimingArgs,
    /// JSON output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-iteration CSV output path.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    All,
    #[value(name = "2b")]
    #[serde(rename = "2b")]
    P1,
    #[value(name = "2c")]
    #[serde(rename = "2c")]
    T1,
    #[value(name = "3")]
    #[serde(rename = "3")]
    Distribution,
    #[value(name = "4")]
    #[serde(rename = "4")]
    Iterations,
    #[value(name = "5")]
    #[serde(rename = "5")]
    Failure,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    /// Directory receiving fig2b.csv … fig5.csv.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = Figure::All)]
    pub figure: Figure,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = StrategyArg::Optimized)]
    pub strategy: StrategyArg,
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    #[arg(long, default_value_t = 10)]
    pub n_min: usize,
    #[arg(long, default_value_t = 100)]
    pub n_max: usize,
    #[arg(long, default_value_t = 5)]
    pub n_step: usize,
    /// Iterations per failure curve.
    #[arg(long, default_value_t = 10)]
    pub k_max: usize,
    #[arg(long, value_delimiter = ',', default_values_t = vec![50, 100])]
    pub distribution_n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![20, 40])]
    pub iteration_n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![25, 50, 75, 100])]
    pub failure_n: Vec<usize>,
    #[command(flatten)]
    pub timing: TimingArgs,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModel {
    Powerlaw,
    Linear,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FitModel::Powerlaw)]
    pub model: FitModel,
    /// Key column (defaults to the first data column).
    #[arg(long)]
    pub x: Option<String>,
    /// Value column (defaults to the second data column).
    #[arg(long)]
    pub y: Option<String>,
    /// Mode assumed when the CSV has no `mode` column.
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OracleArgs {
    #[arg(long = "n", default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Number of random payload/schedule seeds (0, 1, …).
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SwapArgs {
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PropagatorArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    /// Last time point; defaults to 2N.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_GRID_STEP)]
    pub step: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DistributionArgs {
    #[arg(long = "n", default_value_t = 50)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    #[command(flatten)]
    pub timing: TimingArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(invalid(name, format!("must be positive, got {value}")))
    }
}
