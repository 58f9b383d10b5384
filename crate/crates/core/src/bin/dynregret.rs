use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dynregret::harness::{fit_summary, read_summary, run_experiment, ExperimentConfig, HarnessError, FIT_HEADER};

#[derive(Parser)]
#[command(name = "dynregret", version, about = "Run and summarize discounted online-learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured experiment and write per-round and summary CSVs.
    Run {
        config: PathBuf,
        /// Write outputs here instead of the config's output_dir.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Fit regret growth across horizons from a summary CSV.
    Fit { summary: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, output_dir } => ExperimentConfig::load(&config).and_then(|c| {
            let outcome = run_experiment(&c, output_dir.as_deref())?;
            for row in outcome.rows.iter().filter(|r| !r.is_ok()) {
                eprintln!("{} / {} / {} seed {} T {}: {}", row.algorithm, row.scenario, row.comparator, row.seed, row.horizon, row.status);
            }
            println!("wrote {} ({} runs, {} failed)", outcome.summary_path.display(), outcome.rows.len(), outcome.failures());
            Ok(outcome.exit_code())
        }),
        Command::Validate { config } => ExperimentConfig::load(&config).map(|c| {
            println!("ok: {} algorithm(s), {} comparator(s), {} seed(s)", c.algorithms.len(), c.comparators.len(), c.seeds().len());
            0
        }),
        Command::Fit { summary } => read_summary(&summary).map(|rows| {
            println!("{FIT_HEADER}");
            for f in fit_summary(&rows) {
                println!("{}", f.to_csv());
            }
            0
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                HarnessError::Config(_) | HarnessError::Io { .. } => 1,
            })
        }
    }
}
