use anyhow::{anyhow, bail};
use clap::Args;
use lattigauss::theta::{e_p_un, e_sp, e_t};
use serde::{Deserialize, Serialize};

use super::{to_row, Assertion, Output};

pub const IDENTITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsArgs {
    /// Grid `start:step:end` (inclusive).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
}

fn decimals(s: &str) -> usize {
    s.split_once('.').map_or(0, |(_, f)| {
        f.trim_end_matches(|c: char| !c.is_ascii_digit()).len()
    })
}

/// Parse `start:step:end`. Points are computed on an integer lattice of the
/// finest decimal precision present, so `1:0.1:5` hits 4 exactly.
pub fn parse_grid(spec: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    let [s, d, e] = parts[..] else {
        bail!("grid {spec:?} must look like start:step:end");
    };
    let num = |x: &str| {
        x.parse::<f64>()
            .map_err(|err| anyhow!("grid value {x:?}: {err}"))
    };
    let (start, step, end) = (num(s)?, num(d)?, num(e)?);
    if !(step > 0.0) || end < start {
        bail!("grid {spec:?} needs a positive step and end ≥ start");
    }
    let dec = decimals(s).max(decimals(d)).max(decimals(e)).min(12) as i32;
    let scale = 10f64.powi(dec);
    let (s0, st) = ((start * scale).round(), (step * scale).round());
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        bail!("grid {spec:?} has too many points");
    }
    Ok((0..count).map(|i| (s0 + i as f64 * st) / scale).collect())
}

#[derive(Serialize)]
struct Row {
    b: f64,
    #[serde(rename = "E_sp")]
    e_sp: f64,
    #[serde(rename = "E_P_un")]
    e_p_un: Option<f64>,
    #[serde(rename = "E_T")]
    e_t: Option<f64>,
}

pub fn run(mut args: ExponentsArgs) -> anyhow::Result<Output> {
    let grid = parse_grid(args.grid.get_or_insert_with(|| "1:0.1:5".into()))?;
    let mut rows = Vec::with_capacity(grid.len());
    let mut worst: f64 = 0.0;
    for &b in &grid {
        let r = Row {
            b,
            e_sp: e_sp(b),
            e_p_un: e_p_un(b).ok(),
            e_t: e_t(b).ok(),
        };
        if let (Some(p), Some(t)) = (r.e_p_un, r.e_t) {
            worst = worst.max((e_sp(t) - p).abs());
        }
        rows.push(to_row(&r)?);
    }
    let assertions = vec![Assertion::new(
        "threshold-identity",
        worst <= IDENTITY_TOL,
        format!("max |E_sp(E_T(b)) - E_P_un(b)| = {worst:e}"),
    )];
    Output::new(&args, rows, assertions)
}
