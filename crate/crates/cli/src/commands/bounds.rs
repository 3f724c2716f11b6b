use anyhow::bail;
use clap::Args;
use lattigauss::bounds::{a_fl, b_fl, b_fl_full_rank, b_nn_upper, h_upper, AFL_DUAL_TOL};
use lattigauss::gf::xi_stats;
use lattigauss::EnsembleSpec;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{quadruple, required, to_row, Assertion, Output};

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsNnArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    /// Scale; derived from `epsilon` when absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_w: Option<f64>,
    /// Also report the neighbour-count bound at this radius.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
}

pub fn run_nn(mut args: BoundsNnArgs) -> anyhow::Result<Output> {
    let sigma_w = *args.sigma_w.get_or_insert(1.0);
    let q = quadruple(
        args.n,
        args.k,
        args.p,
        &mut args.a,
        &mut args.epsilon,
        sigma_w,
    )?;
    let nn = b_nn_upper(&q, sigma_w)?;
    let mut row =
        to_row(&json!({"n": q.n(), "k": q.k(), "p": q.p(), "a": q.a(), "sigma_w": sigma_w}))?;
    row.extend(to_row(&nn)?);
    row.insert("vacuous".into(), json!(nn.is_vacuous()));
    if let Some(rho) = args.rho {
        row.insert("rho".into(), json!(rho));
        row.insert("h_upper".into(), json!(h_upper(&q, rho)?));
    }
    let ok = nn.total.is_finite() && nn.total > 0.0;
    let assertions = vec![Assertion::new(
        "bound-finite",
        ok,
        format!("total = {}", nn.total),
    )];
    Output::new(&args, vec![row], assertions)
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsFlatnessArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub taus: Option<Vec<f64>>,
    /// `all` or `full-rank`: the ensemble whose collision statistics enter `A^Fl`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<String>,
}

pub(crate) fn ensemble(name: &str) -> anyhow::Result<EnsembleSpec> {
    match name {
        "all" => Ok(EnsembleSpec::AllMatrices),
        "full-rank" => Ok(EnsembleSpec::FullRankOnly),
        other => bail!("unknown ensemble {other:?}; expected all or full-rank"),
    }
}

pub fn run_flatness(mut args: BoundsFlatnessArgs) -> anyhow::Result<Output> {
    let (n, k, p) = (
        required(args.n, "n")?,
        required(args.k, "k")?,
        required(args.p, "p")?,
    );
    let a = *args.a.get_or_insert(1.0);
    let taus = args.taus.get_or_insert_with(|| vec![0.5, 1.0, 2.0]).clone();
    let ens = ensemble(args.ensemble.get_or_insert_with(|| "all".into()))?;
    let q = lattigauss::ParameterQuadruple::new(n, k, p, a)?;
    let stats = xi_stats(&ens, &q)?;
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for &tau in &taus {
        let r = a_fl(&q, &stats, tau)?;
        worst = worst.max((r.a_fl - r.a_fl_dual).abs() / r.a_fl);
        let mut row = to_row(&json!({"tau": tau}))?;
        row.extend(to_row(&r)?);
        row.insert("b_fl_uniform".into(), json!(b_fl(&q, tau)?));
        let exhaustive = b_fl_full_rank(&q, tau).map_or(Value::Null, |v| json!(v));
        row.insert("b_fl_full_rank".into(), exhaustive);
        rows.push(row);
    }
    let assertions = vec![Assertion::new(
        "dual-forms-agree",
        worst <= AFL_DUAL_TOL,
        format!("max relative gap {worst:e}"),
    )];
    Output::new(&args, rows, assertions)
}
