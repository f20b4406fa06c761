use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spinboson::scenario::{self, Scenario};
use spinboson::Error;

/// Exact and asymptotic reduced dynamics of the RWA spin-boson model.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write CSV tables plus a manifest.
    Run {
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print derived constants without computing trajectories.
    Constants { scenario: PathBuf },
    /// Run a bundled scenario.
    Preset {
        #[arg(value_parser = scenario::PRESETS)]
        name: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn execute(cli: Cli) -> spinboson::Result<()> {
    match cli.command {
        Command::Run { scenario, out } => write(&Scenario::from_path(&scenario)?, &out),
        Command::Preset { name, out } => write(&scenario::preset(&name)?, &out),
        Command::Constants { scenario } => {
            let s = Scenario::from_path(&scenario)?;
            for manifest in scenario::report_constants(&s)? {
                print!("{manifest}");
                println!();
            }
            Ok(())
        }
    }
}

fn write(s: &Scenario, out: &std::path::Path) -> spinboson::Result<()> {
    for path in scenario::run(s, out)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) => 2,
                Error::Io(_) => 1,
                _ => 3,
            })
        }
    }
}
