use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use scorebayes_cli::{run, write_output, CliError, Command, Context, Example, ExperimentConfig};

#[derive(Parser)]
#[command(name = "scorebayes", version, about = "Bayesian inference with proper scoring rules")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// vmf, eqcorr, regression or custom
    example: String,
    /// Key-value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed in the configuration file
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Minimum-score estimate with Godambe quantities
    Estimate(Common),
    /// Calibrated posterior by Metropolis-Hastings
    Sample(Common),
    /// Tabulate prior densities
    PriorEval(Common),
    /// Plot data for an example
    Reproduce(Common),
}

fn execute(command: Command, args: Common) -> Result<(), CliError> {
    let example = Example::parse(&args.example)?;
    let (cfg, data_dir) = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let dir = path.parent().map(PathBuf::from).unwrap_or_default();
            (ExperimentConfig::parse_with_example(&text, Some(example))?, dir)
        }
        None => (ExperimentConfig::new(example), PathBuf::from(".")),
    };
    let seed = args
        .seed
        .or(cfg.seed)
        .ok_or_else(|| CliError::Config("a seed is required (--seed or 'seed' in the config)".into()))?;
    let output = run(command, &cfg, seed, &Context { data_dir })?;
    write_output(&args.out, &output)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Estimate(a) => (Command::Estimate, a),
        Cmd::Sample(a) => (Command::Sample, a),
        Cmd::PriorEval(a) => (Command::PriorEval, a),
        Cmd::Reproduce(a) => (Command::Reproduce, a),
    };
    match execute(command, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("scorebayes: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
