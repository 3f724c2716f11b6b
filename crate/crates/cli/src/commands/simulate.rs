use anyhow::bail;
use clap::Args;
use lattigauss::gf::sample_matrix;
use lattigauss::simulate::{
    batch_rng, ensemble_error_vs_bound, estimate_decode_error, lg_experiment, TrialPlan,
};
use lattigauss::{ConstructionALattice, EnsembleSpec, ParameterQuadruple};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::bounds::ensemble;
use super::{quadruple, required, to_row, Assertion, Context, MatrixArg, Output};

/// Stream domain for matrices drawn by the CLI itself.
const CLI_MATRIX_DOMAIN: u32 = 0xC1;

fn plan(
    ctx: &Context,
    trials: &mut Option<u64>,
    batch: &mut Option<u64>,
    default_trials: u64,
) -> anyhow::Result<TrialPlan> {
    let t = *trials.get_or_insert(default_trials);
    let b = *batch.get_or_insert(1000);
    Ok(TrialPlan::new(ctx.seed, t, ctx.workers, b)?)
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateDecodeArgs {
    /// `construction-a` or `integers` (the scaled lattice `aZ^n`).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice: Option<String>,
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
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_w: Option<f64>,
    /// Generator matrix, rows separated by `;`; drawn full-rank from the seed when absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixArg>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch: Option<u64>,
}

fn construction_a(
    q: &ParameterQuadruple,
    matrix: &mut Option<MatrixArg>,
    seed: u64,
) -> anyhow::Result<ConstructionALattice> {
    let m = match matrix {
        Some(m) => m.to_matrix(q.p())?,
        None => {
            let mut rng = batch_rng(seed, CLI_MATRIX_DOMAIN, 0);
            let m = sample_matrix(&EnsembleSpec::FullRankOnly, q, &mut rng)?;
            let rows = (0..m.rows())
                .map(|i| (0..m.cols()).map(|j| m.get(i, j)).collect())
                .collect();
            *matrix = Some(MatrixArg(rows));
            m
        }
    };
    Ok(ConstructionALattice::new(*q, m)?)
}

pub fn run_decode(mut args: SimulateDecodeArgs, ctx: &Context) -> anyhow::Result<Output> {
    let sigma_w = *args.sigma_w.get_or_insert(1.0);
    let kind = args
        .lattice
        .get_or_insert_with(|| "construction-a".into())
        .clone();
    let lat = match kind.as_str() {
        "integers" => {
            let n = required(args.n, "n")?;
            ConstructionALattice::scaled_integers(n, *args.a.get_or_insert(1.0))?
        }
        "construction-a" => {
            let q = quadruple(
                args.n,
                args.k,
                args.p,
                &mut args.a,
                &mut args.epsilon,
                sigma_w,
            )?;
            construction_a(&q, &mut args.matrix, ctx.seed)?
        }
        other => bail!("unknown lattice {other:?}; expected construction-a or integers"),
    };
    let plan = plan(ctx, &mut args.trials, &mut args.batch, 10_000)?;
    let e = estimate_decode_error(&lat, sigma_w, &plan)?;
    let mut row = to_row(&json!({"n": lat.dim(), "a": lat.scale(), "sigma_w": sigma_w}))?;
    row.extend(to_row(&e)?);
    Output::new(&args, vec![row], vec![])
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateEnsembleArgs {
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
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_w: Option<f64>,
    /// `full-rank` or `all`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrices: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch: Option<u64>,
}

pub fn run_ensemble(mut args: SimulateEnsembleArgs, ctx: &Context) -> anyhow::Result<Output> {
    let sigma_w = *args.sigma_w.get_or_insert(1.0);
    let q = quadruple(
        args.n,
        args.k,
        args.p,
        &mut args.a,
        &mut args.epsilon,
        sigma_w,
    )?;
    let ens = ensemble(args.ensemble.get_or_insert_with(|| "full-rank".into()))?;
    let matrices = *args.matrices.get_or_insert(20);
    let plan = plan(ctx, &mut args.trials, &mut args.batch, 10_000)?;
    let r = ensemble_error_vs_bound(&q, &ens, sigma_w, matrices, &plan)?;
    let mut rows = Vec::new();
    for (i, e) in r.per_matrix.iter().enumerate() {
        let mut row = to_row(&json!({"matrix": i}))?;
        row.extend(to_row(e)?);
        rows.push(row);
    }
    let bound = r.bound.total;
    let detail = format!(
        "mean {} (combined stderr {}) vs bound {bound}{}",
        r.mean.p_hat,
        r.combined_stderr,
        if r.vacuous { " (vacuous)" } else { "" }
    );
    let mut summary = to_row(&json!({"matrix": "mean"}))?;
    summary.extend(to_row(&r.mean)?);
    summary.insert("combined_stderr".into(), json!(r.combined_stderr));
    summary.insert("bound".into(), json!(bound));
    summary.insert("vacuous".into(), json!(r.vacuous));
    rows.push(summary);
    Output::new(
        &args,
        rows,
        vec![Assertion::new("mean-within-bound", r.holds, detail)],
    )
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateLgArgs {
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
    /// Generator matrix; defaults to the checkerboard lattice `(1, 1)` in dimension 2.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixArg>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_s: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_z: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch: Option<u64>,
}

pub fn run_lg(mut args: SimulateLgArgs, ctx: &Context) -> anyhow::Result<Output> {
    let n = *args.n.get_or_insert(2);
    let k = *args.k.get_or_insert(1);
    let p = *args.p.get_or_insert(2);
    let a = *args.a.get_or_insert(1.0);
    if args.matrix.is_none() && (n, k, p) == (2, 1, 2) {
        args.matrix = Some(MatrixArg(vec![vec![1], vec![1]]));
    }
    let q = ParameterQuadruple::new(n, k, p, a)?;
    let lat = construction_a(&q, &mut args.matrix, ctx.seed)?;
    let ss = *args.sigma_s.get_or_insert(3.0);
    let sz = *args.sigma_z.get_or_insert(1.0);
    let c = args.center.get_or_insert_with(|| vec![0.0; n]).clone();
    let plan = plan(ctx, &mut args.trials, &mut args.batch, 100_000)?;
    let r = lg_experiment(&lat, ss, sz, &c, &plan)?;
    let mut row = to_row(&r)?;
    row.insert("power_ratio".into(), json!(r.power / (ss * ss)));
    let paired = 3.0 * r.map_error.stderr.hypot(r.euclid_error.stderr);
    let per_dim = r.entropy_direct / n as f64;
    let assertions = vec![
        Assertion::new(
            "map-within-bound",
            r.holds,
            format!(
                "MAP error {} vs bound {}{}",
                r.map_error.p_hat,
                r.bound,
                if r.vacuous { " (vacuous)" } else { "" }
            ),
        ),
        Assertion::new(
            "map-not-worse-than-euclidean",
            r.map_error.p_hat <= r.euclid_error.p_hat + paired,
            format!(
                "MAP {} vs Euclidean {}",
                r.map_error.p_hat, r.euclid_error.p_hat
            ),
        ),
        Assertion::new(
            "entropy-identity",
            (r.entropy_direct - r.entropy_formula).abs() <= 1e-9,
            format!(
                "direct {} vs formula {}",
                r.entropy_direct, r.entropy_formula
            ),
        ),
        Assertion::new(
            "rate-below-entropy",
            r.rate_lb <= per_dim + 1e-12,
            format!(
                "rate bound {} vs entropy per dimension {per_dim}",
                r.rate_lb
            ),
        ),
    ];
    Output::new(&args, vec![row], assertions)
}
