use std::process::ExitCode;

use anyhow::{Context, Result};
use chartctl::cli::{Cli, Command};
use chartctl::commands::{cmd_bounds, cmd_render, cmd_sweep, cmd_verify, EXIT_USAGE};
use clap::Parser;

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("ISOFLAT_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("ISOFLAT_THREADS={v:?} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    init_threads()?;
    let mut out = std::io::stdout().lock();
    match &cli.command {
        Command::Bounds(a) => cmd_bounds(a, &mut out),
        Command::Verify(a) => cmd_verify(a, &mut out),
        Command::Sweep(a) => cmd_sweep(a, &mut out),
        Command::Render(a) => cmd_render(a, &mut out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
