// SPDX-License-Identifier: Apache-2.0

//! `msearch`: sweeps, time series and reports for the monitored quantum-walk search.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use monitored_search::model::{build_params, exceptional_point, ModelParams};
use serde::Serialize;

/// Exit code for rejected parameters.
pub const EXIT_INVALID: u8 = 2;
/// Exit code for numerical failures.
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(monitored_search::Error),
    Io(std::io::Error),
    Format(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "invalid input: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Format(m) => write!(f, "output error: {m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_INVALID,
            CliError::Core(e) if e.is_invalid_input() => EXIT_INVALID,
            CliError::Core(_) => EXIT_NUMERICAL,
            CliError::Io(_) | CliError::Format(_) => 1,
        }
    }
}

impl From<monitored_search::Error> for CliError {
    fn from(e: monitored_search::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Format(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Format(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "msearch", version, about = "Monitored quantum-walk search on the complete graph")]
#[command(args_override_self = true)]
struct Cli {
    /// Output directory (default ./out/<timestamp>-<command>)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps; results do not depend on it
    #[arg(long, global = true, env = "MSEARCH_JOBS")]
    jobs: Option<usize>,
    /// Flat key=value or JSON file mirroring the flags; explicit flags win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues, eigenvectors and overlaps over N and (gamma, kappa) sweeps
    Spectrum(SpectrumArgs),
    /// No-click probability and fidelities on a time grid
    Pt(PtArgs),
    /// Search time over a list of N, with exponent fit
    Tau(TauArgs),
    /// Predicted exponent over an (r_bar, s) grid
    PhaseDiagram(PhaseArgs),
    /// Search time under resetting over a period or exponent grid
    ResetScan(ResetScanArgs),
    /// Compare the two-level reduction against the full N-dimensional evolution
    OracleCheck(OracleArgs),
    /// Sample first-click times and compare with the analytic distribution
    Mc(McArgs),
    /// Query-complexity exponents and validity bound
    Query(QueryArgs),
}

/// Parameters: `gamma = gamma_bar N^(-r_bar-1)`, `kappa = kappa_bar N^(-s)` unless set directly.
#[derive(Args, Debug, Clone, Serialize)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 1.0)]
    pub gamma_bar: f64,
    #[arg(long, default_value_t = 1.0)]
    pub kappa_bar: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub r_bar: f64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub s: f64,
    /// Hopping rate, overriding the scaling form
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Measurement rate, overriding the scaling form
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Set gamma to its exceptional-point value 1/(N-2)
    #[arg(long)]
    pub gamma_ep: bool,
    /// Set kappa to its exceptional-point value 2 sqrt(N-1)/(N-2)
    #[arg(long)]
    pub kappa_ep: bool,
    /// On-site energy of the target
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub epsilon_w: f64,
}

impl ModelArgs {
    pub fn is_family(&self) -> bool {
        self.gamma.is_none() && self.kappa.is_none() && !self.gamma_ep && !self.kappa_ep && self.epsilon_w == 1.0
    }

    pub fn params(&self, n: usize) -> Result<ModelParams<f64>, CliError> {
        let base = build_params(n, self.gamma_bar, self.kappa_bar, self.r_bar, self.s)?;
        let ep = || exceptional_point::<f64>(n);
        let gamma = match (self.gamma, self.gamma_ep) {
            (Some(_), true) => return Err(CliError::Usage("--gamma and --gamma-ep are exclusive".into())),
            (Some(g), false) => g,
            (None, true) => ep()?.0,
            (None, false) => base.gamma(),
        };
        let kappa = match (self.kappa, self.kappa_ep) {
            (Some(_), true) => return Err(CliError::Usage("--kappa and --kappa-ep are exclusive".into())),
            (Some(k), false) => k,
            (None, true) => ep()?.1,
            (None, false) => base.kappa(),
        };
        if self.is_family() {
            return Ok(base);
        }
        Ok(ModelParams::with_target_energy(n, gamma, kappa, self.epsilon_w)?)
    }
}

/// Database sizes, as an explicit list or a geometric grid.
#[derive(Args, Debug, Clone, Serialize)]
pub struct SizeArgs {
    /// Comma-separated list of N
    #[arg(long = "n", value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Geometric grid LO_EXP,HI_EXP,COUNT of N = 10^x
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub n_geom: Option<Vec<f64>>,
}

impl SizeArgs {
    pub fn sizes(&self) -> Result<Vec<usize>, CliError> {
        let mut out = self.n.clone();
        if let Some(g) = &self.n_geom {
            let g = triple(g)?;
            let count = grid_count(g[2])?;
            out.extend(monitored_search::analysis::geometric_sizes(g[0], g[1], count));
        }
        if out.is_empty() {
            return Err(CliError::Usage("no system sizes given (use --n or --n-geom)".into()));
        }
        Ok(out)
    }
}

/// Check a `LO,HI,COUNT` triple.
pub fn triple(spec: &[f64]) -> Result<[f64; 3], CliError> {
    match spec {
        [a, b, c] => Ok([*a, *b, *c]),
        _ => Err(CliError::Usage(format!("expected LO,HI,COUNT, got {} values", spec.len()))),
    }
}

pub fn grid_count(x: f64) -> Result<usize, CliError> {
    if x.fract() != 0.0 || x < 1.0 {
        return Err(CliError::Usage(format!("grid count must be a positive integer, got {x}")));
    }
    Ok(x as usize)
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sizes: SizeArgs,
    /// Linear sweep LO,HI,COUNT of gamma
    #[arg(long, value_delimiter = ',')]
    pub gamma_sweep: Option<Vec<f64>>,
    /// Linear sweep LO,HI,COUNT of kappa
    #[arg(long, value_delimiter = ',')]
    pub kappa_sweep: Option<Vec<f64>>,
    /// Interpret sweep values in units of the exceptional-point values
    #[arg(long)]
    pub ep_units: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum PtMethod {
    /// Closed-form two-level propagation
    Closed,
    /// Full N-dimensional evolution, fixed-step RK4
    FullRk4,
    /// Full N-dimensional evolution, adaptive Dormand-Prince
    FullAdaptive,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PtArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "n")]
    pub n: usize,
    #[arg(long, default_value_t = 0.0)]
    pub t_min: f64,
    /// End of the time grid (default 10 sqrt(N))
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 1001)]
    pub points: usize,
    /// Grid spacing, overriding --points
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long, value_enum, default_value_t = PtMethod::Closed)]
    pub method: PtMethod,
    /// RK4 step for --method full-rk4
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Reset period
    #[arg(long)]
    pub reset_period: Option<f64>,
    /// Append the leading-order exceptional-point envelope and asymptote
    #[arg(long)]
    pub ep_bounds: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum TauMode {
    /// First time F1 reaches 1 - epsilon
    Click,
    /// First time F0 reaches 1 - epsilon
    Occupation,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ResetRule {
    None,
    /// T = 1/|Im lambda_fast|
    Fast,
    /// Fixed T from --period
    Period,
    /// T = N^beta from --beta
    Beta,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TauArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sizes: SizeArgs,
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = TauMode::Click)]
    pub mode: TauMode,
    #[arg(long, value_enum, default_value_t = ResetRule::None)]
    pub reset: ResetRule,
    #[arg(long)]
    pub period: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseMode {
    NoReset,
    ResetFast,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PhaseArgs {
    /// LO,HI,COUNT of r_bar
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-2,1,61")]
    pub r_grid: Vec<f64>,
    /// LO,HI,COUNT of s
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-2,1,61")]
    pub s_grid: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub gamma_bar: f64,
    #[arg(long, value_enum, default_value_t = PhaseMode::NoReset)]
    pub mode: PhaseMode,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ResetScanArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Sizes; one N for a period scan, several for an exponent scan
    #[command(flatten)]
    pub sizes: SizeArgs,
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    /// Geometric period grid LO,HI,COUNT
    #[arg(long, value_delimiter = ',')]
    pub periods: Option<Vec<f64>>,
    /// Explicit periods
    #[arg(long, value_delimiter = ',')]
    pub period_list: Vec<f64>,
    /// Linear grid LO,HI,COUNT of beta in T = N^beta
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub betas: Option<Vec<f64>>,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum IntegratorKind {
    Adaptive,
    Rk4,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OracleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "n")]
    pub n: usize,
    /// End of the time grid (default 4 sqrt(N))
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 41)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = IntegratorKind::Adaptive)]
    pub integrator: IntegratorKind,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub atol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub rtol: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct McArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "n")]
    pub n: usize,
    #[arg(long)]
    pub reset_period: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub trajectories: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    /// Histogram range (default: 99th percentile of the click times)
    #[arg(long)]
    pub t_max: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct QueryArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub r_bar: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub s: f64,
    /// Resetting with T = 1/|Im lambda_fast|
    #[arg(long)]
    pub reset: bool,
    /// Physical time-step floor for the validity bound
    #[arg(long, default_value_t = 0.01)]
    pub dt0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma_bar: f64,
    #[arg(long, default_value_t = 1.0)]
    pub kappa_bar: f64,
}

fn run(cli: Cli) -> Result<PathBuf, CliError> {
    let jobs = match cli.jobs {
        Some(0) => return Err(CliError::Usage("--jobs must be positive".into())),
        Some(j) => j,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let name = match &cli.command {
        Command::Spectrum(_) => "spectrum",
        Command::Pt(_) => "pt",
        Command::Tau(_) => "tau",
        Command::PhaseDiagram(_) => "phase-diagram",
        Command::ResetScan(_) => "reset-scan",
        Command::OracleCheck(_) => "oracle-check",
        Command::Mc(_) => "mc",
        Command::Query(_) => "query",
    };
    let dir = cli.out.clone().unwrap_or_else(|| output::default_out_dir(name));
    let run = match &cli.command {
        Command::Spectrum(a) => commands::spectrum(a, output::Run::new(dir, name, a)?)?,
        Command::Pt(a) => commands::pt(a, output::Run::new(dir, name, a)?)?,
        Command::Tau(a) => commands::tau(a, output::Run::new(dir, name, a)?)?,
        Command::PhaseDiagram(a) => commands::phase_diagram(a, output::Run::new(dir, name, a)?)?,
        Command::ResetScan(a) => commands::reset_scan(a, output::Run::new(dir, name, a)?)?,
        Command::OracleCheck(a) => commands::oracle_check(a, output::Run::new(dir, name, a)?)?,
        Command::Mc(a) => commands::mc(a, output::Run::new(dir, name, a)?)?,
        Command::Query(a) => commands::query(a, output::Run::new(dir, name, a)?)?,
    };
    run.finish(jobs)
}

fn main() -> ExitCode {
    let args = match config::expand_args(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("msearch: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let cli = Cli::parse_from(args);
    match run(cli) {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("msearch: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
