//! Command-line front end for `xyzglass-core`: JSON configs in, JSON
//! reports and CSV tables out.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod selftest;

use std::path::{Path, PathBuf};

pub use commands::{Outcome, Subcommand};
pub use config::RunConfig;
pub use error::CliError;
pub use report::{CheckRecord, Report};

/// Environment variable read when `--threads` is absent.
pub const THREADS_ENV: &str = "XYZGLASS_THREADS";

/// Overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Paths written by one run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    pub report_path: PathBuf,
    pub tables: Vec<PathBuf>,
}

/// Reads and parses a config file.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
    RunConfig::from_json(&text)
}

/// Validates, computes and writes the report of one subcommand.
pub fn run(cmd: Subcommand, mut config: RunConfig, overrides: &Overrides) -> Result<RunOutput, CliError> {
    if let Some(seed) = overrides.seed {
        config.seed = seed;
    }
    commands::validate(cmd, &config)?;
    let outcome = commands::execute(cmd, &config)?;
    let report = Report::new(cmd.name(), &config, outcome.checks, outcome.results)?;
    let out = overrides
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output.dir));
    let files = report::RunFiles::create(report::run_dir(&out, &config)?)?;
    let mut tables = Vec::new();
    for (stem, contents) in &outcome.tables {
        tables.push(files.write(stem, "csv", contents)?);
    }
    let report_path = files.write("report", "json", report.to_json().as_bytes())?;
    Ok(RunOutput {
        report,
        report_path,
        tables,
    })
}

/// `--threads`, else the environment override, else rayon's default.
pub fn configure_threads(flag: Option<usize>) -> Result<(), CliError> {
    let threads = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
                CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("thread count must be positive".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}
