use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use semiquantal_cli::{load_config, output_dir, run_experiment, CliError, Experiment};

#[derive(Parser)]
#[command(name = "semiquantal", version, about = "Semiquantal double-well experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a configuration file.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config's `output` key).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Worker threads for parameter sweeps.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Check a configuration file without running it.
    Validate { config: PathBuf },
    /// List the available experiments.
    ListExperiments,
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { config, output, jobs } => {
            let cfg = load_config(&config)?;
            let dir = output_dir(&cfg, output.as_deref());
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(n) = jobs {
                pool = pool.num_threads(n.max(1));
            }
            let pool = pool.build().expect("thread pool");
            let files = pool.install(|| run_experiment(&cfg, &dir))?;
            println!("{}: wrote {} files to {}", cfg.experiment.name(), files.len(), dir.display());
        }
        Command::Validate { config } => {
            let cfg = load_config(&config)?;
            println!("{}: ok ({})", config.display(), cfg.experiment.name());
        }
        Command::ListExperiments => {
            for e in Experiment::ALL {
                println!("{:<10} {}", e.name(), e.summary());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
