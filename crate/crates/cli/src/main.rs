use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use evoad_cli::commands::{cmd_evaluate, cmd_evolve, cmd_synth, cmd_train_eval, load_config_with_overrides};
use evoad_cli::config::CliError;

#[derive(Parser)]
#[command(name = "evoad", version, about = "Evolving autoencoder ensembles for time-series anomaly detection")]
struct Cli {
    /// Worker threads for fitness evaluation and submodel training
    /// (default: one per CPU).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labelled dataset (train.csv, test.csv, manifest.json).
    Synth {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the genetic search and write the best partition plus logs.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Train the final ensemble on a partition, calibrate, vote on the
    /// test set, and write the evaluation report.
    TrainEval {
        #[arg(long)]
        config: PathBuf,
        /// Partition file produced by `evolve`.
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Also train and report the monolithic single-model baseline.
        #[arg(long)]
        baseline: bool,
        /// Report point-adjusted metrics alongside the raw ones.
        #[arg(long)]
        point_adjust: bool,
    },
    /// Recompute metrics from an existing scores.csv dump.
    Evaluate {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        point_adjust: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Validation("--jobs must be >= 1".into()));
        }
        // a pre-existing global pool (e.g. in tests) is fine
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match cli.command {
        Command::Synth { config, seed } => cmd_synth(&load_config_with_overrides(&config, seed)?),
        Command::Evolve { config, seed } => cmd_evolve(&load_config_with_overrides(&config, seed)?),
        Command::TrainEval {
            config,
            partition,
            seed,
            baseline,
            point_adjust,
        } => cmd_train_eval(
            &load_config_with_overrides(&config, seed)?,
            &partition,
            baseline,
            point_adjust,
        ),
        Command::Evaluate { scores, point_adjust } => cmd_evaluate(&scores, point_adjust),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
