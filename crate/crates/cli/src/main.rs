mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub const VERSION: &str = env!("SEMIGRAPH_VERSION");

#[derive(Parser)]
#[command(name = "semigraph", version = VERSION, about = "Graph dimensions of operator semistable Lévy processes")]
struct Cli {
    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral decomposition of an exponent file {"c": .., "matrix": [[..]]}.
    Decompose { file: PathBuf },
    /// Closed-form graph and range dimensions and the sojourn exponent.
    Dim(DimArgs),
    /// Simulate one path and write a binary dump with a sidecar.
    Simulate(SimulateArgs),
    /// Box-counting or energy estimate over an ensemble of paths.
    Estimate(EstimateArgs),
    /// Monte Carlo sojourn times and their scaling slope.
    Sojourn(SojournArgs),
    /// Run verification scenarios; exit 0 PASS, 1 FAIL, 3 INCONCLUSIVE.
    Verify(VerifyArgs),
    /// Cartesian sweep over α and time sets, written as CSV.
    Sweep(SweepArgs),
}

/// Process model flags shared by the simulating commands.
#[derive(Args, Clone, Default)]
pub struct ModelArgs {
    /// Exponent as a JSON file or inline JSON.
    #[arg(long)]
    exponent: Option<String>,
    /// Shortcut for a scalar symmetric α-stable process (E = 1/α, c = 2).
    #[arg(long, conflicts_with = "exponent")]
    alpha: Option<f64>,
    /// Block laws as a JSON list (file or inline); default: stable laws.
    #[arg(long)]
    laws: Option<String>,
}

#[derive(Args)]
pub struct DimArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha1: Option<f64>,
    #[arg(long)]
    alpha2: Option<f64>,
    #[arg(long)]
    d1: Option<usize>,
    #[arg(long)]
    s: Option<f64>,
    /// Ambient dimension; default d1 + 1 when alpha2 is given, else d1.
    #[arg(long)]
    d: Option<usize>,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also write a CSV copy of the path.
    #[arg(long)]
    csv: bool,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
pub struct EstimateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
    /// Time set as JSON (file or inline); default [0, 1].
    #[arg(long)]
    set: Option<String>,
    /// box, range or energy.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
pub struct SojournArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Built-in scenario name; repeatable.
    #[arg(long)]
    scenario: Vec<String>,
    /// Scenario JSON file; repeatable.
    #[arg(long)]
    scenario_file: Vec<PathBuf>,
    /// Run every built-in scenario.
    #[arg(long)]
    all: bool,
    /// Override the scenarios' master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of box,sojourn,energy.
    #[arg(long, value_delimiter = ',')]
    stages: Vec<String>,
    /// Write report.json and report.txt here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    /// Middle-piece Cantor sets with two pieces of these ratios.
    #[arg(long, value_delimiter = ',')]
    cantor_ratios: Option<Vec<f64>>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    budget_secs: Option<f64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global() {
            eprintln!("error: Threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Decompose { file } => commands::decompose(&file),
        Command::Dim(a) => commands::dim(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Estimate(a) => commands::estimate(a),
        Command::Sojourn(a) => commands::sojourn(a),
        Command::Verify(a) => commands::verify(a),
        Command::Sweep(a) => commands::sweep(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}: {}", commands::error_name(&e), commands::strip_name(&e));
            ExitCode::from(2)
        }
    }
}
