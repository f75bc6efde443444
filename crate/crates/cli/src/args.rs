use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use percap_core::LiftLevel;

#[derive(Debug, Parser)]
#[command(
    name = "percap",
    version,
    about = "Binary perceptron capacity by lifted random duality"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Capacity at one threshold
    Capacity(CapacityArgs),
    /// Capacity over an evenly spaced threshold grid
    Curve(CurveArgs),
    /// Reproduce one of the reference tables (1, 2 or 3)
    Table(TableArgs),
    /// Crossover threshold of the partial second level
    KappaC(KappaCArgs),
    /// Scan of q - psi_q(q) over the fixed-point bracket
    Uniqueness(UniquenessArgs),
    /// Monte Carlo feasibility rates at fixed n
    Simulate(SimulateArgs),
    /// Empirical 50% feasibility threshold at fixed n
    Threshold(ThresholdArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exhaustive,
    Local,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write to FILE instead of stdout
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct NumericArgs {
    /// Gauss-Hermite quadrature order
    #[arg(long, default_value_t = 200)]
    pub nodes: usize,
    /// Solver residual tolerance
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

fn parse_level(s: &str) -> Result<LiftLevel, String> {
    s.parse().map_err(|e: percap_core::Error| e.to_string())
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed {s:?}: {e}"))
}

#[derive(Debug, Clone, Args)]
pub struct CapacityArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: f64,
    /// Lifting level: 1, 2p or 2f
    #[arg(long, default_value = "2f", value_parser = parse_level)]
    pub level: LiftLevel,
    #[arg(long)]
    pub allow_extrapolation: bool,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub kappa_min: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub kappa_max: f64,
    #[arg(long)]
    pub step: f64,
    #[arg(long, default_value = "2f", value_parser = parse_level)]
    pub level: LiftLevel,
    #[arg(long)]
    pub allow_extrapolation: bool,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
    pub which: u8,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct KappaCArgs {
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct UniquenessArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: f64,
    #[arg(long)]
    pub allow_extrapolation: bool,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub kappa: f64,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, value_enum, default_value = "exhaustive")]
    pub method: MethodArg,
    /// Local-search restarts per instance
    #[arg(long, default_value_t = percap_core::mc::DEFAULT_RESTARTS)]
    pub restarts: usize,
    /// Master seed, decimal or 0x-prefixed hex
    #[arg(long, default_value = "0", value_parser = parse_seed)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub mc: McArgs,
    /// Constraint counts (comma separated)
    #[arg(
        long,
        value_delimiter = ',',
        required_unless_present = "alpha",
        conflicts_with = "alpha"
    )]
    pub m: Vec<usize>,
    /// Ratios m/n (comma separated); m = round(alpha n)
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub mc: McArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}
