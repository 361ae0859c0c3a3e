use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use resfi::analysis::CurveParams;
use resfi::cli::{self, CliError, RunOptions};
use resfi::netemu::ScenarioConfig;

#[derive(Parser)]
#[command(name = "resfi", version, about = "Emulate ResFi neighborhoods and evaluate the airtime model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the virtual run length.
    #[arg(long = "duration-ms")]
    duration_ms: Option<f64>,
    /// Report destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and print the JSON report.
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Comma-separated applications, replacing the scenario's list.
        #[arg(long, value_delimiter = ',')]
        apps: Option<Vec<String>>,
    },
    /// Write available-airtime curves as CSV.
    Curves {
        /// JSON parameter overrides.
        params: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure KCM to key-installed latency.
    Latency {
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { scenario, common, apps } => {
            let config = ScenarioConfig::load(&scenario)?;
            let options = RunOptions { seed: common.seed, duration_ms: common.duration_ms, apps };
            let report = cli::run(&config, &options)?;
            emit(common.out.as_deref(), &report.to_json())?;
            eprint!("{}", report.summary());
            if !report.violations.is_empty() {
                return Err(CliError::Invariant(report.violations));
            }
        }
        Command::Curves { params, out } => {
            let params = match params {
                Some(path) => CurveParams::load(&path)?,
                None => CurveParams::default(),
            };
            emit(out.as_deref(), &cli::curves(&params)?)?;
        }
        Command::Latency { scenario, common } => {
            let config = ScenarioConfig::load(&scenario)?;
            let options = RunOptions { seed: common.seed, duration_ms: common.duration_ms, apps: None };
            let report = cli::latency_experiment(&config, &options)?;
            emit(common.out.as_deref(), &report.to_json())?;
            if let Some(s) = &report.overall {
                eprintln!("{} samples, mean {:.2} ms, p90 {:.2} ms", s.samples, s.mean_ms, s.p90_ms);
            }
            if !report.violations.is_empty() {
                return Err(CliError::Invariant(report.violations));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
