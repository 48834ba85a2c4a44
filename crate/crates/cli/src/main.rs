//! `ambush`: build roadmaps, solve the ambush game, compare planners and
//! sample routes.

mod commands;
mod config;
mod render;

use std::process::ExitCode;

use ambush_core::Error;
use clap::{Parser, Subcommand};

use config::{Flags, RunConfig};

#[derive(Parser)]
#[command(
    name = "ambush",
    version,
    about = "Minimax random routing against a single ambush"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a roadmap and write network.json
    Build(Flags),
    /// Solve the game and write equilibrium.json (plus figures with --plot)
    Solve(Flags),
    /// Run both solvers and all planners; write solvers.csv and planners.csv
    Compare(Flags),
    /// Draw routes from the equilibrium and write paths.txt
    Sample(Flags),
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Core(
                Error::IterationCap { .. } | Error::Solver { .. } | Error::NotOptimal { .. },
            ) => 3,
            Failure::Core(_) => 2,
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Build(f) => commands::build(&RunConfig::resolve(f)?),
        Command::Solve(f) => commands::solve(&RunConfig::resolve(f)?),
        Command::Compare(f) => commands::compare(&RunConfig::resolve(f)?),
        Command::Sample(f) => commands::sample(&RunConfig::resolve(f)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Core(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(f.exit_code())
        }
    }
}
