//! `mcf`: command-line front end for the mcf-core numerics.
//!
//! Exit codes: 0 success, 1 internal error, 2 failed hypothesis or rejected
//! input, 64 usage error.

mod args;
mod commands;
mod output;
mod plot;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;

const EXIT_INTERNAL: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_USAGE: u8 = 64;

/// Reads `MCF_THREADS` and sizes the global rayon pool accordingly.
fn configure_threads() -> Result<Option<usize>, String> {
    let raw = match std::env::var("MCF_THREADS") {
        Ok(v) => v,
        Err(std::env::VarError::NotPresent) => return Ok(None),
        Err(e) => return Err(format!("MCF_THREADS: {e}")),
    };
    let n: usize = raw.trim().parse().map_err(|_| format!("MCF_THREADS must be a positive integer, got {raw:?}"))?;
    if n == 0 {
        return Err("MCF_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    Ok(Some(n))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let threads = match configure_threads() {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };

    let outcome = match commands::run(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = if commands::is_validation(&e) { EXIT_VALIDATION } else { EXIT_INTERNAL };
            return ExitCode::from(code);
        }
    };

    let emitted = (|| -> anyhow::Result<()> {
        print!("{}", output::pretty(&outcome.report)?);
        if let Some(dir) = &cli.out {
            let config = serde_json::to_value(&cli.command)?;
            output::write_all(dir, cli.command.name(), &config, threads, &outcome)?;
        }
        Ok(())
    })();
    if let Err(e) = emitted {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_INTERNAL);
    }
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        eprintln!("hypothesis or validation check failed");
        ExitCode::from(EXIT_VALIDATION)
    }
}
