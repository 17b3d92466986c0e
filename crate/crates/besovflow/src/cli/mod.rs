//! Command-line orchestration: `run`, `sweep` and `bench-inequalities`
//! subcommands over the flat key = value configuration format.

pub mod config;
pub mod initial;
pub mod output;
pub mod plot;
pub mod run;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::{Error, Result};

pub use config::{parse_config, parse_config_text, ExperimentKind, InitialKind, RunConfig};
pub use initial::gen_initial;
pub use output::{read_verdicts, Comparison, Verdict};
pub use run::{run, run_config_file, RunOutcome};

#[derive(Debug, Parser)]
#[command(
    name = "besovflow",
    about = "Spectral experiments for damped two-phase flow: decay-rate fits, \
             boundedness tracks and harmonic-analysis inequality benches"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute one experiment described by a config file.
    Run { config: PathBuf },
    /// Execute every config matching a glob pattern, in parallel; each run
    /// writes to its own subdirectory named after the config file.
    Sweep { pattern: String },
    /// Run the Bernstein/product-law inequality benches for a config.
    BenchInequalities { config: PathBuf },
}

/// Worker cap for sweeps: `BESOVFLOW_THREADS` or the available parallelism.
fn thread_cap() -> usize {
    std::env::var("BESOVFLOW_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

fn sweep(pattern: &str) -> Result<bool> {
    let paths: Vec<PathBuf> = glob::glob(pattern)
        .map_err(|e| Error::Config(format!("invalid glob pattern '{pattern}': {e}")))?
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Io(e.into()))?;
    if paths.is_empty() {
        return Err(Error::Config(format!("no configs match '{pattern}'")));
    }
    let cap = thread_cap();
    let mut all_passed = true;
    for chunk in paths.chunks(cap) {
        let handles: Vec<_> = chunk
            .iter()
            .cloned()
            .map(|path| {
                std::thread::spawn(move || -> Result<bool> {
                    let mut cfg = parse_config(&path)?;
                    let stem = path
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_else(|| "run".into());
                    cfg.out_dir = cfg.out_dir.join(stem);
                    Ok(run(&cfg)?.all_passed)
                })
            })
            .collect();
        for (path, h) in chunk.iter().zip(handles) {
            match h.join() {
                Ok(Ok(passed)) => {
                    log::info!(
                        "{}: {}",
                        path.display(),
                        if passed { "pass" } else { "FAIL" }
                    );
                    all_passed &= passed;
                }
                Ok(Err(e)) => return Err(Error::Solver(format!("{}: {e}", path.display()))),
                Err(_) => {
                    return Err(Error::Solver(format!(
                        "{}: worker panicked",
                        path.display()
                    )))
                }
            }
        }
    }
    Ok(all_passed)
}

/// Dispatches a parsed command line; returns the process exit code
/// (nonzero exactly when a verdict failed or an error occurred).
pub fn dispatch(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Run { config } => run_config_file(&config).map(|o| o.all_passed),
        Command::Sweep { pattern } => sweep(&pattern),
        Command::BenchInequalities { config } => parse_config(&config).and_then(|mut cfg| {
            cfg.kind = ExperimentKind::InequalityBench;
            Ok(run(&cfg)?.all_passed)
        }),
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
