use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use npmc_cli::{commands, run_experiment, write_outputs, CliError, ExperimentConfig, MethodSpec};
use npmc_core::SimulationCase;

#[derive(Parser)]
#[command(name = "npmc", version, about = "Neyman-Pearson multi-class classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a replicated experiment and write summary.json and replications.csv.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Master seed; overrides `master_seed` in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Leave the generation time out of summary.json.
        #[arg(long)]
        no_timestamp: bool,
    },
    /// Fit one classifier on the configured data and write classifier.json.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Method such as `cx+logistic`; defaults to the first one in the config.
        #[arg(long)]
        method: Option<MethodSpec>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Predict labels for a CSV of features with a saved classifier.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Column of the data file to ignore, such as the true label.
        #[arg(long)]
        label_column: Option<String>,
        #[arg(long, default_value = "predictions.csv")]
        out: PathBuf,
    },
    /// Export a simulated dataset as CSV.
    Simulate {
        #[arg(long, value_enum)]
        case: CaseArg,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "y")]
        label_column: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    Case1,
    Case2,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            config,
            out,
            jobs,
            seed,
            no_timestamp,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = out
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("npmc-out"));
            let output = run_experiment(&cfg, seed.unwrap_or(cfg.master_seed), jobs)?;
            write_outputs(&output, &dir, !no_timestamp)?;
            for m in &output.summaries {
                println!(
                    "{}: {} feasible, {} infeasible",
                    m.method, m.summary.feasible_count, m.summary.infeasible_count
                );
            }
            println!("wrote {}", dir.display());
        }
        Command::Train {
            config,
            method,
            out,
            seed,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let path = commands::train(&cfg, method, seed.unwrap_or(cfg.master_seed), &out)?;
            println!("feasible; wrote {}", path.display());
        }
        Command::Predict {
            model,
            data,
            label_column,
            out,
        } => {
            let n = commands::predict_file(&model, &data, label_column.as_deref(), &out)?;
            println!("wrote {n} labels to {}", out.display());
        }
        Command::Simulate {
            case,
            n,
            seed,
            label_column,
            out,
        } => {
            let case = match case {
                CaseArg::Case1 => SimulationCase::Case1,
                CaseArg::Case2 => SimulationCase::Case2,
            };
            commands::simulate(case, n, seed, &label_column, &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
