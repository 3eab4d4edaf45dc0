//! `echogeo`: simulate echoes, build cochleagrams and corpora, train the
//! glint networks, and reconstruct target geometry.

mod cli;
mod commands;
mod output;
mod units;

use std::process::ExitCode;

use clap::Parser;

use output::{param, CliResult};

/// Caps worker threads from `ECHOGEO_THREADS`.
fn init_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("ECHOGEO_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| param(format!("ECHOGEO_THREADS={raw:?} must be a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| param(format!("cannot size the thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = cli::Cli::parse();
    match init_threads().and_then(|_| commands::run(&cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("echogeo: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
