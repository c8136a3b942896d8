mod commands;
mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use endonet::dynamics::UpdateRule;

#[derive(Parser, Debug)]
#[command(name = "endonet", version, about = "Opinion dynamics on endogenously formed peer networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one trajectory of the myopic network-formation model.
    Simulate(SimulateArgs),
    /// Phase diagram over an (f, V) grid.
    Sweep(SweepArgs),
    /// Bounded-confidence baseline.
    Hk(HkArgs),
    /// Fully rational game on a small explicit profile.
    Rational(RationalArgs),
    /// Recompute metrics from a stored run.json.
    Analyze(AnalyzeArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dist {
    Uniform,
    Normal,
    Bimodal,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Update {
    Equilibrium,
    Hearing,
}

impl From<Update> for UpdateRule {
    fn from(u: Update) -> Self {
        match u {
            Update::Equilibrium => UpdateRule::Equilibrium,
            Update::Hearing => UpdateRule::Hearing,
        }
    }
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct InitialArgs {
    /// Number of agents (default 101; 81 for `sweep`).
    #[arg(long)]
    pub n: Option<usize>,
    /// Initial opinion distribution.
    #[arg(long, value_enum, default_value_t = Dist::Uniform)]
    pub dist: Dist,
    /// Target sample variance for --dist normal.
    #[arg(long, default_value_t = endonet::distributions::DEFAULT_NORMAL_VARIANCE)]
    pub variance: f64,
    /// Distance between the two mode centres for --dist bimodal.
    #[arg(long, default_value_t = endonet::distributions::DEFAULT_MODE_GAP)]
    pub mode_gap: f64,
    /// Width of each mode for --dist bimodal.
    #[arg(long, default_value_t = endonet::distributions::DEFAULT_MODE_WIDTH)]
    pub mode_width: f64,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub initial: InitialArgs,
    /// Flexibility: weight on the peers' opinions.
    #[arg(long, default_value_t = 0.5)]
    pub f: f64,
    /// Value of a link.
    #[arg(long = "V", default_value_t = 0.0350917)]
    pub v: f64,
    /// Horizon in periods.
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    /// Opinion rule: one averaging sweep (hearing) or the within-period equilibrium.
    #[arg(long, value_enum, default_value_t = Update::Hearing)]
    pub update: Update,
    /// Also write edges.csv.
    #[arg(long)]
    pub edges: bool,
    /// Also write trajectory.svg.
    #[arg(long)]
    pub plot: bool,
    /// Polarization sensitivities reported per step.
    #[arg(long, value_delimiter = ',', default_values_t = [0.8, 1.0, 1.6])]
    pub alpha: Vec<f64>,
    /// Opinion segments for polarization.
    #[arg(long, default_value_t = 10)]
    pub segments: usize,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub initial: InitialArgs,
    /// Horizon per cell.
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    /// Grid size as <f points>x<V points>; 100x100 is the full-size diagram.
    #[arg(long, default_value = "25x25", value_parser = parse_grid)]
    pub grid: (usize, usize),
    #[arg(long = "f-range", value_delimiter = ',', num_args = 2, default_values_t = [0.05, 0.95])]
    pub f_range: Vec<f64>,
    #[arg(long = "V-range", value_delimiter = ',', num_args = 2, default_values_t = [0.002, 0.2])]
    pub v_range: Vec<f64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, value_enum, default_value_t = Update::Hearing)]
    pub update: Update,
    /// Search every window width instead of the capped search.
    #[arg(long)]
    pub no_pruning: bool,
    /// Also write heatmap.svg.
    #[arg(long)]
    pub plot: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct HkArgs {
    #[command(flatten)]
    pub initial: InitialArgs,
    #[arg(long, default_value_t = 0.5)]
    pub f: f64,
    /// Confidence radius.
    #[arg(long, default_value_t = 0.2)]
    pub eps: f64,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    #[arg(long)]
    pub edges: bool,
    #[arg(long)]
    pub plot: bool,
    #[arg(long, value_delimiter = ',', default_values_t = [0.8, 1.0, 1.6])]
    pub alpha: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub segments: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct RationalArgs {
    /// Ordered initial opinions, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub theta: Vec<f64>,
    /// One flexibility for everyone, or one per agent.
    #[arg(long, value_delimiter = ',', required = true)]
    pub f: Vec<f64>,
    #[arg(long = "V")]
    pub v: f64,
    /// List every Nash network over contiguous windows.
    #[arg(long)]
    pub enumerate: bool,
    /// Enumerate over all peer subsets instead of windows.
    #[arg(long)]
    pub all_subsets: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct AnalyzeArgs {
    /// A run.json written by `simulate` or `hk`.
    pub run: PathBuf,
    /// Write polarization.csv.
    #[arg(long)]
    pub polarization: bool,
    #[arg(long, value_delimiter = ',', default_values_t = [0.8, 1.0, 1.6])]
    pub alpha: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub segments: usize,
    /// Output directory (default: next to the run file).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected AxB, got {s:?}"))?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

/// Failure split by exit code: bad flags exit 2, failures while running exit 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Hk(a) => commands::hk(a),
        Command::Rational(a) => commands::rational(a),
        Command::Analyze(a) => commands::analyze(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
