//! `cachepir`: bounds, corner tables, gap scans, simulation and
//! verification from the command line.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 a run completed
//! but a check failed.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use cachepir::Rational;
use clap::{Args, Parser, Subcommand, ValueEnum};

use output::{Format, OutputSpec};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    /// Output was written but the run did not pass.
    Failed,
}

impl From<cachepir::Error> for CliError {
    fn from(e: cachepir::Error) -> Self {
        match e {
            cachepir::Error::Serialization(m) => CliError::Io(m),
            other => CliError::Usage(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cachepir", version, about = "Cache-aided PIR with partially known uncoded prefetching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Decimal digits for approximate columns.
    #[arg(long, default_value_t = 12)]
    precision: u32,
}

impl OutputArgs {
    fn target(&self) -> OutputSpec {
        OutputSpec { format: self.format, path: self.out.clone(), precision: self.precision }
    }
}

#[derive(Debug, Args)]
struct System {
    #[arg(long = "messages", short = 'K')]
    k: u32,
    #[arg(long = "databases", short = 'N')]
    n: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyMode {
    Reliability,
    Leak,
    Consumption,
    Structural,
    Statistical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ViewArg {
    Auto,
    Full,
    Equation,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Outer, inner, gap and fully-known baseline over a grid of ratios.
    Bounds {
        #[command(flatten)]
        system: System,
        /// Evenly spaced grid size; corner abscissas are always added.
        #[arg(long, default_value_t = 512, conflicts_with = "ratios")]
        points: u32,
        /// Explicit ratios instead of a grid.
        #[arg(long, value_delimiter = ',')]
        ratios: Option<Vec<Rational>>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Corner points of the achievable curve.
    Corners {
        #[command(flatten)]
        system: System,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Worst-case gap for every K up to a maximum.
    Gap {
        #[arg(long = "databases", short = 'N')]
        n: u32,
        #[arg(long)]
        max_messages: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run full sessions and compare the metered cost with the formula.
    Simulate {
        #[command(flatten)]
        system: System,
        #[arg(long, conflicts_with = "ratio", required_unless_present = "ratio")]
        corner: Option<u32>,
        #[arg(long)]
        ratio: Option<Rational>,
        #[arg(long, default_value_t = 1)]
        target: u32,
        #[arg(long, default_value_t = cachepir::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run one of the verifiers; exits 3 when it fails.
    Verify {
        #[command(flatten)]
        system: System,
        #[arg(long)]
        corner: u32,
        #[arg(long, value_enum)]
        mode: VerifyMode,
        /// Transcripts per target (statistical mode).
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        /// Sessions per target (reliability mode).
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = cachepir::verify::DEFAULT_TV_THRESHOLD)]
        tv_threshold: f64,
        #[arg(long, value_enum, default_value = "auto")]
        view: ViewArg,
        #[arg(long, default_value_t = cachepir::DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Bounds { system, points, ratios, output } => {
            commands::bounds(system.k, system.n, points, ratios, &output.target())
        }
        Command::Corners { system, output } => commands::corners(system.k, system.n, &output.target()),
        Command::Gap { n, max_messages, output } => commands::gap(n, max_messages, &output.target()),
        Command::Simulate { system, corner, ratio, target, seed, trials, output } => {
            commands::simulate(system.k, system.n, corner, ratio, target, seed, trials, &output.target())
        }
        Command::Verify { system, corner, mode, samples, trials, tv_threshold, view, seed, output } => {
            let opts = commands::VerifyOpts { mode, samples, trials, tv_threshold, view, seed };
            commands::verify(system.k, system.n, corner, opts, &output.target())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Failed) => ExitCode::from(3),
    }
}
