use anyhow::bail;
use clap::Args;
use lattigauss::simulate::run_small_instance_suite;
use serde::{Deserialize, Serialize};

use super::{to_row, Assertion, Context, Output};

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyArgs {
    /// Suite to run; only `small-instances` exists.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
}

pub fn run(mut args: VerifyArgs, ctx: &Context) -> anyhow::Result<Output> {
    match args
        .suite
        .get_or_insert_with(|| "small-instances".into())
        .as_str()
    {
        "small-instances" => {
            let report = run_small_instance_suite(ctx.seed, ctx.workers)?;
            let rows = report
                .rows
                .iter()
                .map(to_row)
                .collect::<anyhow::Result<Vec<_>>>()?;
            let bad = report.violations();
            let detail = format!("{} checks, {bad} violations", report.rows.len());
            Output::new(
                &args,
                rows,
                vec![Assertion::new("small-instances", bad == 0, detail)],
            )
        }
        other => bail!("unknown suite {other:?}; expected small-instances"),
    }
}
