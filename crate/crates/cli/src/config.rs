use std::path::PathBuf;

use anyhow::{bail, Context};
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::args::{Cli, Format};

pub const DEFAULT_SEED: u64 = 1;
pub const THREADS_ENV: &str = "LATTIGAUSS_THREADS";

/// On-disk run configuration.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<String>,
    #[serde(default)]
    pub parameters: Map<String, Value>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub output_path: Option<PathBuf>,
    pub workers: Option<usize>,
}

#[derive(Debug)]
pub struct Resolved {
    pub command: String,
    pub parameters: Value,
    pub seed: u64,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub workers: usize,
}

fn thread_cap() -> anyhow::Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .with_context(|| format!("{THREADS_ENV}={v} is not a positive integer"))?;
            if n == 0 {
                bail!("{THREADS_ENV} must be positive");
            }
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

/// Merge the config file (if any) with command-line flags; flags win.
pub fn resolve(cli: Cli) -> anyhow::Result<Resolved> {
    let file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            serde_json::from_str::<ConfigFile>(&text)
                .with_context(|| format!("invalid config {}", path.display()))?
        }
        None => ConfigFile::default(),
    };
    let command = match (&cli.command, &file.command) {
        (Some(c), Some(f)) if c.name() != f => {
            bail!("command {} conflicts with config command {f}", c.name())
        }
        (Some(c), _) => c.name().to_string(),
        (None, Some(f)) => f.clone(),
        (None, None) => bail!("no command given"),
    };
    let mut parameters = file.parameters;
    if let Some(c) = &cli.command {
        if let Value::Object(flags) = c.flags()? {
            parameters.extend(flags);
        }
    }
    let requested = cli
        .workers
        .or(file.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if requested == 0 {
        bail!("workers must be positive");
    }
    let workers = match thread_cap()? {
        Some(cap) => requested.min(cap),
        None => requested,
    };
    Ok(Resolved {
        command,
        parameters: Value::Object(parameters),
        seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        format: cli.format.or(file.format).unwrap_or(Format::Json),
        output: cli.output.or(file.output_path),
        workers,
    })
}
