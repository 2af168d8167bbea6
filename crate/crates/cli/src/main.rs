//! `parrondo` command-line front end.
//!
//! Exit codes: 0 success, 1 computation error or failed match check,
//! 2 usage error, 3 parameter outside the domain.

mod args;
mod commands;
mod output;
mod table;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use output::{emit, Failure, Format};

fn run(cli: &Cli) -> Result<bool, Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Compute(e.to_string()))?;
    }
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    if let Command::SweepK(a) = &cli.command {
        return commands::sweep_k(a, cli.format.unwrap_or(Format::Csv), &mut lock);
    }
    if let Command::Region(a) = &cli.command {
        return commands::region(a, cli.format.unwrap_or(Format::Csv), &mut lock);
    }
    let out = match &cli.command {
        Command::Analyze(a) => commands::analyze(cli.backend, a)?,
        Command::Pattern(a) => commands::pattern(cli.backend, a)?,
        Command::Spectrum(a) => commands::spectrum(a)?,
        Command::Bounds(a) => commands::bounds(a)?,
        Command::VerifyPoint(a) => commands::verify_point(a)?,
        Command::Limit(a) => commands::limit(cli.backend, a)?,
        Command::Epsilon0(a) => commands::epsilon0(a)?,
        Command::Simulate(a) => commands::simulate(a)?,
        Command::PaperTable => table::paper_table()?,
        Command::SweepK(_) | Command::Region(_) => unreachable!(),
    };
    emit(&out, cli.format.unwrap_or(Format::Json), &mut lock)?;
    lock.flush()?;
    Ok(out.ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
