use anyhow::bail;
use clap::Args;
use lattigauss::bounds::{b_nn_upper, lg_flatness_taus, theorem_ff_check};
use lattigauss::params::{check_mac, check_pe_prime, cm_schedule, pe_schedule, DELTA_PRIME_MIN};
use lattigauss::theta::{e_p_un, e_sp, e_t};
use lattigauss::ParameterQuadruple;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::{quadruple, Assertion, Output};

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsArgs {
    /// Schedule: `pe` (reliable decoding), `cm` (lattice Gaussian coding) or `single`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<String>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ns: Option<Vec<usize>>,
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
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_fraction: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_s: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_z: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

fn nn_row(
    q: &ParameterQuadruple,
    sigma_w: f64,
    delta: Option<f64>,
) -> anyhow::Result<Map<String, Value>> {
    let nn = b_nn_upper(q, sigma_w)?;
    let Value::Object(mut row) = json!({
        "n": q.n(),
        "k": q.k(),
        "p": q.p(),
        "a": q.a(),
        "sigma_w": sigma_w,
        "epsilon": q.epsilon(sigma_w),
        "volume_2n": q.volume_2n(),
        "vnr": q.vnr(sigma_w),
        "mac": check_mac(q.n(), q.k(), q.p(), DELTA_PRIME_MIN),
    }) else {
        unreachable!()
    };
    if let Some(d) = delta {
        row.insert(
            "pe_prime".into(),
            json!(check_pe_prime(q.n(), q.k(), q.p(), d, q.epsilon(sigma_w))),
        );
    }
    row.insert("nn_total".into(), json!(nn.total));
    row.insert("nn_exponent".into(), json!(nn.exponent));
    row.insert("nn_vacuous".into(), json!(nn.is_vacuous()));
    Ok(row)
}

pub fn run(mut args: ParamsArgs) -> anyhow::Result<Output> {
    let kind = args.schedule.get_or_insert_with(|| "pe".into()).clone();
    let sigma_w = *args.sigma_w.get_or_insert(1.0);
    match kind.as_str() {
        "single" => {
            let q = quadruple(
                args.n,
                args.k,
                args.p,
                &mut args.a,
                &mut args.epsilon,
                sigma_w,
            )?;
            let row = nn_row(&q, sigma_w, args.delta)?;
            let mac = row["mac"] == json!(true);
            let assertion = Assertion::new(
                "mac",
                mac,
                format!("compatibility condition for p = {}", q.p()),
            );
            Output::new(&args, vec![row], vec![assertion])
        }
        "pe" => {
            let ns = args
                .ns
                .get_or_insert_with(|| vec![50, 100, 200, 400])
                .clone();
            let eps = *args.epsilon.get_or_insert(3.0);
            let kf = *args.k_fraction.get_or_insert(0.25);
            let delta = match args.delta {
                Some(d) => d,
                None => *args.delta.insert(e_t(1.0 + eps)?),
            };
            let sched = pe_schedule(&ns, kf, delta, eps, sigma_w)?;
            let rows = sched
                .entries()
                .iter()
                .map(|e| nn_row(&e.quad, e.sigma_w, Some(delta)))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let primes_ok = rows.iter().all(|r| r["pe_prime"] == json!(true));
            let expo: Vec<f64> = rows
                .iter()
                .map(|r| r["nn_exponent"].as_f64().unwrap_or(f64::NAN))
                .collect();
            let limit = e_sp(delta).min(e_p_un(1.0 + eps)?);
            let rising = expo.windows(2).all(|w| w[1] >= w[0]);
            let below = expo.iter().all(|&e| e <= limit);
            let assertions = vec![
                Assertion::new(
                    "prime-condition",
                    primes_ok,
                    "every prime exceeds the reliable-decoding threshold",
                ),
                Assertion::new(
                    "exponent-trend",
                    rising && below,
                    format!("exponents {expo:?} nondecreasing and at most the limit {limit}"),
                ),
            ];
            Output::new(&args, rows, assertions)
        }
        "cm" => {
            let ns = args.ns.get_or_insert_with(|| vec![16, 32, 64]).clone();
            let ss = *args.sigma_s.get_or_insert(3.0);
            let sz = *args.sigma_z.get_or_insert(1.0);
            let eta = *args.eta.get_or_insert(0.5);
            let gamma = *args
                .gamma
                .get_or_insert(2.0 * std::f64::consts::PI * 1.5f64.exp());
            args.sigma_w = None;
            let sched = cm_schedule(&ns, ss, sz, eta, gamma)?;
            let taus = lg_flatness_taus(ss, sz);
            let check = theorem_ff_check(&sched, &taus)?;
            let mut rows = Vec::new();
            for e in sched.entries() {
                let q = &e.quad;
                let Value::Object(mut row) = json!({
                    "n": q.n(),
                    "k": q.k(),
                    "p": q.p(),
                    "a": q.a(),
                    "sigma_w": e.sigma_w,
                    "mac": check_mac(q.n(), q.k(), q.p(), DELTA_PRIME_MIN),
                }) else {
                    unreachable!()
                };
                for r in check.rows.iter().filter(|r| r.n == q.n()) {
                    let j = r.j + 1;
                    row.insert("tau1_v2n".into(), json!(r.tau1_v2n));
                    row.insert(format!("tau_{j}"), json!(r.tau));
                    row.insert(format!("f_{j}"), json!(r.f));
                    row.insert(format!("g_{j}"), json!(r.g));
                    row.insert(format!("b_fl_{j}"), json!(r.b_fl));
                }
                rows.push(row);
            }
            let mac = rows.iter().all(|r| r["mac"] == json!(true));
            let assertions = vec![
                Assertion::new("mac", mac, "compatibility condition at every block length"),
                Assertion::new(
                    "f-decreasing",
                    check.f_decreasing(),
                    "f_j strictly decreasing in n",
                ),
                Assertion::new(
                    "g-decreasing",
                    check.g_decreasing(),
                    "g_j strictly decreasing in n",
                ),
                Assertion::new(
                    "b-fl-decreasing",
                    check.b_fl_decreasing(),
                    "B^Fl strictly decreasing in n",
                ),
                Assertion::new(
                    "hypotheses",
                    check.violations.is_empty(),
                    check.violations.join("; "),
                ),
            ];
            Output::new(&args, rows, assertions)
        }
        other => bail!("unknown schedule {other:?}; expected pe, cm or single"),
    }
}
