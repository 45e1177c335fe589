use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};
use xyzglass_cli::{configure_threads, load_config, run, CliError, Overrides, RunConfig, Subcommand};

#[derive(Parser)]
#[command(name = "xyzglass", version, about = "Finite-size checks for quantum XYZ spin glasses")]
enum Cli {
    /// Paired gauge identities for the configured observables.
    VerifyIdentities(Common),
    /// Magnetization and susceptibility bound chains, A1 and A2 diagnostics.
    VerifyBounds(Common),
    /// Magnetization, overlap and pressure over a beta or field sweep.
    OrderParams(Common),
    /// Membership queries and grids in the coupling-ratio space.
    PhaseRegion(Common),
    /// Operator algebra and reference cross-checks.
    Selftest(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to XYZGLASS_THREADS or the number of CPUs.
    #[arg(long)]
    threads: Option<usize>,
    /// Output root; defaults to `output.dir` of the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, common) = match cli {
        Cli::VerifyIdentities(c) => (Subcommand::VerifyIdentities, c),
        Cli::VerifyBounds(c) => (Subcommand::VerifyBounds, c),
        Cli::OrderParams(c) => (Subcommand::OrderParams, c),
        Cli::PhaseRegion(c) => (Subcommand::PhaseRegion, c),
        Cli::Selftest(c) => (Subcommand::Selftest, c),
    };
    match run_command(cmd, common) {
        Ok(passed) => ExitCode::from(if passed { 0 } else { 1 }),
        Err(e) => {
            let record = serde_json::to_string(&e.record()).expect("error record serializes");
            eprintln!("{record}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run_command(cmd: Subcommand, common: Common) -> Result<bool, CliError> {
    configure_threads(common.threads)?;
    let config = match (&common.config, cmd) {
        (Some(path), _) => load_config(path)?,
        (None, Subcommand::Selftest) => RunConfig::empty(),
        (None, _) => return Err(CliError::Config("--config is required".into())),
    };
    let overrides = Overrides {
        seed: common.seed,
        out: common.out,
    };
    let output = run(cmd, config, &overrides)?;
    for c in &output.report.checks {
        let status = match (c.asserted, c.passed) {
            (false, _) => "INFO",
            (true, true) => "PASS",
            (true, false) => "FAIL",
        };
        println!(
            "{status} {} [{}] value={:e} tolerance={:e}",
            c.name, c.method, c.value, c.tolerance
        );
    }
    for t in &output.tables {
        println!("table {}", t.display());
    }
    println!("report {}", output.report_path.display());
    Ok(output.report.passed)
}
