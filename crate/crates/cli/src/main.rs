use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use ermakov_cli::{run_batch, CliError, Command};

/// Ermakov-system verification lab.
#[derive(Debug, Parser)]
#[command(name = "ermakov", version)]
struct Args {
    command: Command,
    /// Scenario JSON file; repeat for a batch.
    #[arg(long, required = true)]
    scenario: Vec<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for a batch.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("{}", CliError::config("usage", first).diagnostic(None));
            return ExitCode::from(ermakov_cli::exit::CONFIG as u8);
        }
    };
    let code = run_batch(args.command, &args.scenario, &args.out, args.jobs.max(1));
    ExitCode::from(code as u8)
}
