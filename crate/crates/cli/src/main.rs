//! `cojump`: spot volatility estimation and volatility co-jump tests on
//! noisy high-frequency prices.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cojump::montecarlo::McConfig;
use cojump::simulator::{table1_scenario, ScenarioId};

use config::{resolve, FileConfig, FilterArg, TestArgs, TuningArgs, DATA_TUNING};

#[derive(Debug, Parser)]
#[command(name = "cojump", version, about = "Do price and volatility jump together?")]
struct Cli {
    /// TOML file with defaults for any flag (same names, kebab-case)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(short, long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate the spot volatility path from a tick file
    Estimate {
        /// CSV with timestamp,price columns
        input: PathBuf,
        #[command(flatten)]
        tuning: TuningArgs,
    },
    /// Detect price jumps and test for volatility co-jumps
    Test {
        /// CSV with timestamp,price columns
        input: PathBuf,
        #[command(flatten)]
        tuning: TuningArgs,
        #[command(flatten)]
        test: TestArgs,
    },
    /// Simulate one trading day of a predefined scenario
    Simulate {
        /// Scenario I to IX
        #[arg(long)]
        scenario: Option<ScenarioId>,
        #[arg(long)]
        seed: Option<u64>,
        /// Override the number of returns
        #[arg(long)]
        n: Option<usize>,
    },
    /// Monte Carlo study of size and power for a scenario
    Mc {
        #[arg(long)]
        scenario: Option<ScenarioId>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads, 0 for all cores
        #[arg(long)]
        threads: Option<usize>,
        /// Which runs enter the aggregates [default: realized-and-detected-one]
        #[arg(long, value_enum)]
        filter: Option<FilterArg>,
        #[command(flatten)]
        tuning: TuningArgs,
        #[command(flatten)]
        test: TestArgs,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let out = cli.out.as_path();
    match cli.command {
        Command::Estimate { input, tuning } => {
            let cfg = resolve(&tuning, &TestArgs::default(), &file, DATA_TUNING)?;
            commands::estimate(&input, &cfg, out)
        }
        Command::Test { input, tuning, test } => {
            let cfg = resolve(&tuning, &test, &file, DATA_TUNING)?;
            commands::test(&input, &cfg, out)
        }
        Command::Simulate { scenario, seed, n } => {
            let id = scenario.or(file.scenario()?).unwrap_or(ScenarioId::I);
            commands::simulate_day(id, seed.or(file.seed).unwrap_or(0), n, out)
        }
        Command::Mc { scenario, runs, seed, threads, filter, tuning, test } => {
            let id = scenario.or(file.scenario()?).unwrap_or(ScenarioId::II);
            let mut scenario = table1_scenario(id);
            let cfg = resolve(&tuning, &test, &file, scenario.tuning)?;
            scenario.tuning = cfg.tuning();
            let mut mc = McConfig::new(scenario, runs.or(file.runs).unwrap_or(1000), seed.or(file.seed).unwrap_or(0));
            mc.threads = threads.or(file.threads).unwrap_or(0);
            mc.filter = config::record_filter(filter, &file);
            mc.spot = cfg.spot;
            mc.detect = cfg.detect;
            mc.group_gap = cfg.group_gap;
            mc.test = cfg.test;
            commands::monte_carlo(&mc, out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let data = e.chain().any(|c| c.downcast_ref::<cojump::Error>().is_some_and(cojump::Error::is_data_error));
            ExitCode::from(if data { 2 } else { 1 })
        }
    }
}
