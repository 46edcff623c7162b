mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "levelbound", version, about = "Fitness-level hitting-time bounds for the (1+1) EA")]
struct Cli {
    /// Working precision of arbitrary-precision arithmetic, in bits.
    #[arg(long, global = true, env = "LEVELBOUND_PRECISION_BITS", default_value_t = 256,
          value_parser = clap::value_parser!(u32).range(16..=1 << 20))]
    precision: u32,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bounds from every method, shortcuts, oracle values and discrepancies.
    Analyze(AnalyzeArgs),
    /// One row of a coefficient table as CSV.
    Coefficients(CoefficientArgs),
    /// The level digraph in DOT format.
    Digraph(DigraphArgs),
    /// Exact mean hitting times.
    Oracle(OracleArgs),
    /// Monte Carlo runs of the (1+1) EA.
    Simulate(SimulateArgs),
    /// Evaluates the appendix products against their closed-form floors.
    VerifyAppendix(AppendixArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct ProblemArgs {
    /// onemax, fullydeceptive, twomax1 or deceptive.
    #[arg(long)]
    pub function: String,
    #[arg(long)]
    pub n: u32,
}

#[derive(Args, Debug, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub problem: ProblemArgs,
    /// Comma-separated method ids; defaults to every applicable method.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// `preset` analyses the preset sub-digraph instead of the full chain.
    #[arg(long, default_value = "none")]
    pub subdigraph: String,
    /// Shortcut threshold; defaults to 1/n.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Start level, or comma-separated probabilities over all levels.
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct CoefficientArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub method: String,
    /// Row to print; defaults to the top level.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value = "none")]
    pub subdigraph: String,
    #[arg(long)]
    pub start: Option<String>,
    /// Output file; stdout when absent. A `.manifest.json` file is written
    /// next to it.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct DigraphArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value = "none")]
    pub subdigraph: String,
    #[arg(long)]
    pub annotate_shortcuts: bool,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct OracleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub problem: ProblemArgs,
    /// level, full or both.
    #[arg(long, default_value = "level")]
    pub mode: String,
    /// Exact rational arithmetic instead of floating point.
    #[arg(long)]
    pub rational: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub problem: ProblemArgs,
    /// Start level, or comma-separated probabilities over all levels;
    /// defaults to the top level.
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub max_generations: Option<u64>,
    /// Include the level trajectory of every trial.
    #[arg(long)]
    pub trajectories: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct AppendixArgs {
    /// The constant C: a number, or a multiple of e written like `2e`.
    #[arg(long = "C")]
    pub c: String,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<u32>,
    /// Also check the printed coefficient floors of these functions.
    #[arg(long, value_delimiter = ',')]
    pub functions: Option<Vec<String>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let bits = cli.precision;
    let result = match &cli.command {
        Command::Analyze(a) => commands::analyze(a, bits),
        Command::Coefficients(a) => commands::coefficients(a, bits),
        Command::Digraph(a) => commands::digraph(a, bits),
        Command::Oracle(a) => commands::oracle(a, bits),
        Command::Simulate(a) => commands::simulate(a, bits),
        Command::VerifyAppendix(a) => commands::verify_appendix(a, bits),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("levelbound: {e}");
            e.exit_code()
        }
    }
}
