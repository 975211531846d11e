use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use todaflow::{load_config, run_scenario, Formats};

/// Runs a growth, Löwner, hydrodynamic, log-gas or moments scenario.
///
/// Exit codes: 0 success, 1 configuration or output error, 2 numerical
/// breakdown (partial outputs are kept). Set TODAFLOW_LOG=info for progress.
#[derive(Parser)]
#[command(name = "todaflow", version)]
struct Cli {
    /// Scenario config (JSON).
    config: PathBuf,
    /// Output directory, overriding output.directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of csv,json,svg.
    #[arg(long, value_parser = Formats::parse_list)]
    format: Option<Formats>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TODAFLOW_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors share the configuration exit code; 2 means breakdown
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let mut config = match load_config(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("todaflow: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(out) = cli.out {
        config.output.directory = out;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(formats) = cli.format {
        config.output.formats = formats;
    }
    match run_scenario(&config) {
        Ok(report) => {
            if let Some(b) = &report.manifest.breakdown {
                eprintln!("todaflow: {} breakdown: {}", b.kind, b.message);
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("todaflow: {e}");
            ExitCode::from(1)
        }
    }
}
