//! Scenario-driven front end for `ermakov-core`.
//!
//! A scenario is a JSON file describing a system, an initial condition and
//! per-pipeline options; see the README for the schema and the CSV headers.

pub mod commands;
pub mod error;
pub mod output;
pub mod scenario;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

pub use error::{exit, CliError};
pub use scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Simulate,
    Reduce,
    Audit,
    SymmetryCheck,
    SymmetrySolve,
    FlowVerify,
    Pullback,
    Report,
}

/// Runs one command on one scenario, writing into `out`.
pub fn run(command: Command, scenario: &Path, out: &Path) -> Result<(), CliError> {
    let sc = Scenario::load(scenario)?;
    let f = match command {
        Command::Simulate => commands::simulate,
        Command::Reduce => commands::reduce,
        Command::Audit => commands::audit,
        Command::SymmetryCheck => commands::symmetry_check,
        Command::SymmetrySolve => commands::symmetry_solve,
        Command::FlowVerify => commands::flow_verify,
        Command::Pullback => commands::pullback,
        Command::Report => commands::report,
    };
    f(&sc, out)
}

/// Runs `command` on every scenario and returns the worst exit code.
/// Diagnostics go to standard error, one JSON line per failed scenario.
///
/// With several scenarios each writes to `out/<file stem>`; `jobs > 1` runs
/// them on a thread pool.
pub fn run_batch(command: Command, scenarios: &[PathBuf], out: &Path, jobs: usize) -> i32 {
    let dirs: Vec<PathBuf> = if scenarios.len() == 1 {
        vec![out.to_path_buf()]
    } else {
        let stems: Vec<String> = scenarios
            .iter()
            .map(|p| p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default())
            .collect();
        let unique: BTreeSet<&String> = stems.iter().collect();
        if unique.len() != stems.len() || stems.iter().any(String::is_empty) {
            let e = CliError::config("usage", "scenario file names must have distinct stems in batch mode");
            eprintln!("{}", e.diagnostic(None));
            return e.code;
        }
        stems.iter().map(|s| out.join(s)).collect()
    };
    let one = |(path, dir): (&PathBuf, &PathBuf)| match run(command, path, dir) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("{}", e.diagnostic(Some(path)));
            e.code
        }
    };
    if jobs <= 1 || scenarios.len() == 1 {
        return scenarios.iter().zip(&dirs).map(one).max().unwrap_or(exit::OK);
    }
    use rayon::prelude::*;
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| scenarios.par_iter().zip(&dirs).map(one).max().unwrap_or(exit::OK)),
        Err(err) => {
            let e = CliError::config("usage", format!("thread pool: {err}"));
            eprintln!("{}", e.diagnostic(None));
            e.code
        }
    }
}
