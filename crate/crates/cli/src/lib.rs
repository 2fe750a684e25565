//! Configuration, artifact output and the named experiments behind the
//! `semiquantal` command.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::path::{Path, PathBuf};

pub use config::{validate_config, ConfigError, Experiment, ExperimentConfig};
pub use error::CliError;
pub use output::{Output, MANIFEST};

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(validate_config(&text)?)
}

/// Output directory: the override, else the config's `output`, else `results/<experiment>`.
pub fn output_dir(cfg: &ExperimentConfig, override_dir: Option<&Path>) -> PathBuf {
    override_dir
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| Path::new("results").join(cfg.experiment.name()))
}

/// Runs one experiment and returns the names of the files written, manifest last.
pub fn run_experiment(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<String>, CliError> {
    let text = cfg.to_text();
    let mut out = Output::create(dir)?;
    out.write("config.txt", |w| w.write_all(text.as_bytes()))?;
    experiments::run(cfg, &mut out)?;
    out.finish(cfg.experiment.name(), &text)
}
