//! One module per subcommand. Each argument struct doubles as the
//! `parameters` object of a config file: every field is optional on input and
//! filled with its default before the run, and the filled struct is echoed.

mod bounds;
mod exponents;
mod params;
mod simulate;
mod verify;

pub use bounds::{BoundsFlatnessArgs, BoundsNnArgs};
pub use exponents::ExponentsArgs;
pub use params::ParamsArgs;
pub use simulate::{SimulateDecodeArgs, SimulateEnsembleArgs, SimulateLgArgs};
pub use verify::VerifyArgs;

use std::str::FromStr;

use anyhow::{anyhow, bail, Context as _};
use lattigauss::{params::solve_scale, GeneratorMatrix, ParameterQuadruple};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub struct Context {
    pub seed: u64,
    pub workers: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

pub struct Output {
    pub parameters: Value,
    pub rows: Vec<Map<String, Value>>,
    pub assertions: Vec<Assertion>,
}

impl Output {
    fn new<P: Serialize>(
        parameters: &P,
        rows: Vec<Map<String, Value>>,
        assertions: Vec<Assertion>,
    ) -> anyhow::Result<Self> {
        Ok(Self {
            parameters: serde_json::to_value(parameters)?,
            rows,
            assertions,
        })
    }
}

fn parse<T: DeserializeOwned>(command: &str, parameters: Value) -> anyhow::Result<T> {
    serde_json::from_value(parameters).with_context(|| format!("invalid parameters for {command}"))
}

pub fn run(command: &str, parameters: Value, ctx: &Context) -> anyhow::Result<Output> {
    match command {
        "params" => params::run(parse(command, parameters)?),
        "bounds-nn" => bounds::run_nn(parse(command, parameters)?),
        "bounds-flatness" => bounds::run_flatness(parse(command, parameters)?),
        "exponents" => exponents::run(parse(command, parameters)?),
        "simulate-decode" => simulate::run_decode(parse(command, parameters)?, ctx),
        "simulate-ensemble" => simulate::run_ensemble(parse(command, parameters)?, ctx),
        "simulate-lg" => simulate::run_lg(parse(command, parameters)?, ctx),
        "verify" => verify::run(parse(command, parameters)?, ctx),
        other => bail!("unknown command {other:?}"),
    }
}

/// A serializable value as a result row.
pub(crate) fn to_row<T: Serialize>(v: &T) -> anyhow::Result<Map<String, Value>> {
    match serde_json::to_value(v)? {
        Value::Object(m) => Ok(m),
        other => Err(anyhow!("expected an object row, got {other}")),
    }
}

pub(crate) fn required<T: Copy>(v: Option<T>, name: &str) -> anyhow::Result<T> {
    v.ok_or_else(|| anyhow!("missing parameter {name}"))
}

/// The quadruple from `n, k, p` and either `a` or the noise margin `epsilon`
/// at `sigma_w`; the resolved `a` is written back.
pub(crate) fn quadruple(
    n: Option<usize>,
    k: Option<usize>,
    p: Option<u64>,
    a: &mut Option<f64>,
    epsilon: &mut Option<f64>,
    sigma_w: f64,
) -> anyhow::Result<ParameterQuadruple> {
    let (n, k, p) = (required(n, "n")?, required(k, "k")?, required(p, "p")?);
    let scale = match *a {
        Some(a) => a,
        None => solve_scale(n, k, p, sigma_w, *epsilon.get_or_insert(3.0))?,
    };
    *a = Some(scale);
    Ok(ParameterQuadruple::new(n, k, p, scale)?)
}

/// Generator matrix rows; on the command line rows are separated by `;` and
/// entries by `,` (so `1;1` is the column vector `(1, 1)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixArg(pub Vec<Vec<u64>>);

impl FromStr for MatrixArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(';')
            .map(|row| {
                row.split(',')
                    .map(|x| x.trim().parse::<u64>().map_err(|e| format!("{x:?}: {e}")))
                    .collect()
            })
            .collect::<Result<_, _>>()
            .map(MatrixArg)
    }
}

impl MatrixArg {
    pub fn to_matrix(&self, p: u64) -> anyhow::Result<GeneratorMatrix> {
        Ok(GeneratorMatrix::from_rows(p, &self.0)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_arg_parses_rows() {
        assert_eq!(
            "1;1".parse::<MatrixArg>().unwrap().0,
            vec![vec![1], vec![1]]
        );
        assert_eq!(
            "1, 2;0,1".parse::<MatrixArg>().unwrap().0,
            vec![vec![1, 2], vec![0, 1]]
        );
        assert!("1;x".parse::<MatrixArg>().is_err());
    }

    #[test]
    fn quadruple_from_margin() {
        let (mut a, mut eps) = (None, None);
        let q = quadruple(Some(12), Some(3), Some(23), &mut a, &mut eps, 1.0).unwrap();
        assert_eq!(eps, Some(3.0));
        assert!((q.epsilon(1.0) - 3.0).abs() < 1e-12);
        assert_eq!(a, Some(q.a()));
        assert!(quadruple(None, Some(3), Some(23), &mut a, &mut eps, 1.0).is_err());
    }

    #[test]
    fn unknown_command_rejected() {
        let ctx = Context {
            seed: 1,
            workers: 1,
        };
        assert!(run("nope", Value::Object(Map::new()), &ctx).is_err());
        assert!(run("exponents", serde_json::json!({"bogus": 1}), &ctx).is_err());
    }
}
