//! `lattigauss` command-line front end.
//!
//! Exit status: 0 when every assertion passes, 2 when one fails, 1 on usage
//! or configuration errors (in which case nothing is written).

mod args;
mod commands;
mod config;
mod report;

use std::io::Write;
use std::process::ExitCode;

use anyhow::Context;
use clap::error::ErrorKind;
use clap::Parser;

use crate::args::Cli;
use crate::config::{resolve, Resolved};

fn execute(cli: Cli) -> anyhow::Result<bool> {
    let Resolved {
        command,
        parameters,
        seed,
        format,
        output,
        workers,
    } = resolve(cli)?;
    let ctx = commands::Context { seed, workers };
    let out = commands::run(&command, parameters, &ctx)?;
    let doc = report::Document::new(&command, seed, format, out);
    let bytes = doc.render(format)?;
    match output {
        Some(path) => std::fs::write(&path, &bytes)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&bytes)?;
            stdout.flush()?;
        }
    }
    let failed: Vec<_> = doc
        .assertions
        .iter()
        .filter(|a| !a.passed)
        .map(|a| a.name.as_str())
        .collect();
    if !failed.is_empty() {
        eprintln!("assertions failed: {}", failed.join(", "));
    }
    Ok(failed.is_empty())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
