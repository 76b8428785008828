use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use fperiod::{Loading, Signal};
use fperiod_cli::config::{Overrides, PipelineConfig};
use fperiod_cli::{cmd_ingest_check, cmd_localpower, cmd_simulate, cmd_test, parse_range, LocalPowerArgs, SimulateArgs};

/// Periodicity tests for functional time series.
#[derive(Parser)]
#[command(name = "fperiod", version)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the test suite on a data file and write the p-value table
    Test {
        data: PathBuf,
        /// Also write an SVG chart of the weekday means
        #[arg(long)]
        svg: bool,
    },
    /// Empirical rejection rates for a simulated design
    Simulate {
        /// ma5-null, ma5-plus-means, model-s:I:J or scenario:K:RHO2
        #[arg(long, default_value = "ma5-null")]
        dgp: String,
        /// Sample sizes
        #[arg(long = "n", default_value = "210,420")]
        sizes: String,
        /// Nominal levels; defaults to --alpha
        #[arg(long)]
        alphas: Option<String>,
    },
    /// Local power curves LP(x) for a signal and loading
    Localpower {
        /// Signal shape 1 (cosine), 2 (step) or 3 (random)
        #[arg(long, default_value_t = 1)]
        signal: usize,
        /// Loading 1 (first), 2 (decaying) or 3 (fourth direction)
        #[arg(long, default_value_t = 2)]
        loading: usize,
        /// start:stop:step
        #[arg(long, default_value = "0:8:0.5")]
        xs: String,
        /// Number of full periods; the series has cycles * period curves
        #[arg(long, default_value_t = 10)]
        cycles: usize,
        #[arg(long)]
        svg: bool,
    },
    /// Validate and summarise a data file
    IngestCheck {
        data: PathBuf,
        /// Write the preprocessed curves as wide CSV
        #[arg(long)]
        emit: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<()> {
    let cfg = PipelineConfig::resolve(&cli.overrides)?;
    match cli.command {
        Command::Test { data, svg } => {
            cmd_test(&cfg, &data, svg)?;
        }
        Command::Simulate { dgp, sizes, alphas } => {
            let args = SimulateArgs::parse(&dgp, &sizes, alphas.as_deref(), &cfg)?;
            cmd_simulate(&cfg, &args)?;
        }
        Command::Localpower { signal, loading, xs, cycles, svg } => {
            let args = LocalPowerArgs {
                signal: Signal::from_index(signal)?,
                loading: Loading::from_index(loading)?,
                xs: parse_range(&xs)?,
                cycles,
            };
            cmd_localpower(&cfg, &args, svg)?;
        }
        Command::IngestCheck { data, emit } => {
            print!("{}", cmd_ingest_check(&cfg, &data, emit.as_deref())?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
