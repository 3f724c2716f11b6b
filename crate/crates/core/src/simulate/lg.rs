use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{batch_rng, run_batches, ErrorEstimate, TrialPlan};
use crate::bounds::h_upper;
use crate::error::{invalid, Error, Result};
use crate::gf::{checked_power, sample_matrix, EnsembleSpec};
use crate::lattice::{
    discrete_gaussian, entropy_lattice_gaussian, rate_lower_bound, signal_power,
    ConstructionALattice, Exclude, DEFAULT_GAUSSIAN_TOL,
};
use crate::numeric::compensated_sum;
use crate::params::{lg_sigma_w, sigma_tilde, ParameterQuadruple};

/// Ensembles with at most this many matrices are averaged exhaustively.
pub const EXHAUSTIVE_ENSEMBLE_CAP: u64 = 1 << 16;

const MATRIX_DOMAIN: u32 = 0xFF_FFFE;
const WHITE_NOISE_DOMAIN: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub directions: u64,
    pub matrices: usize,
    /// Whether the ensemble average was taken over its whole support.
    pub exhaustive: bool,
    pub h_upper: f64,
}

/// Monte Carlo estimate of `E_W[E_G[N_{B(W,ρ)}(aΛ(G) \ apZ^n)] | ‖W‖ = ρ]`.
///
/// The inner expectation is exact when the ensemble has at most
/// [`EXHAUSTIVE_ENSEMBLE_CAP`] matrices; otherwise it averages `matrices`
/// seeded draws.
pub fn estimate_h(
    q: &ParameterQuadruple,
    ens: &EnsembleSpec,
    rho: f64,
    matrices: usize,
    plan: &TrialPlan,
) -> Result<HEstimate> {
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(invalid(format!(
            "rho = {rho} must be finite and nonnegative"
        )));
    }
    let small = match ens {
        EnsembleSpec::Explicit(_) => true,
        _ => checked_power(q.p(), q.n() * q.k(), EXHAUSTIVE_ENSEMBLE_CAP).is_ok(),
    };
    let support: Vec<(ConstructionALattice, f64)> = if small {
        ens.support(q, EXHAUSTIVE_ENSEMBLE_CAP)?
            .into_iter()
            .filter(|&(_, w)| w > 0.0)
            .map(|(m, w)| Ok((ConstructionALattice::new(*q, m)?, w)))
            .collect::<Result<_>>()?
    } else {
        if matrices == 0 {
            return Err(invalid("at least one matrix is required"));
        }
        let mut rng = batch_rng(plan.seed, MATRIX_DOMAIN, 0);
        let w = 1.0 / matrices as f64;
        (0..matrices)
            .map(|_| {
                Ok((
                    ConstructionALattice::new(*q, sample_matrix(ens, q, &mut rng)?)?,
                    w,
                ))
            })
            .collect::<Result<_>>()?
    };
    let n = q.n();
    let p = q.p();
    let values = run_batches(plan, 0, |rng, len| {
        let mut out = Vec::with_capacity(len as usize);
        for _ in 0..len {
            let g: Vec<f64> = (0..n)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            let w: Vec<f64> = g.iter().map(|x| rho * x / norm).collect();
            let mut terms = Vec::with_capacity(support.len());
            for (lat, weight) in &support {
                terms.push(weight * lat.count_in_ball(&w, rho, Exclude::Sublattice(p))? as f64);
            }
            out.push(compensated_sum(terms));
        }
        Ok(out)
    })?;
    let values: Vec<f64> = values.into_iter().flatten().collect();
    let m = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / m;
    let stderr = if values.len() > 1 {
        (compensated_sum(values.iter().map(|v| (v - mean).powi(2))) / (m - 1.0) / m).sqrt()
    } else {
        0.0
    };
    Ok(HEstimate {
        mean,
        stderr,
        directions: plan.trials,
        matrices: support.len(),
        exhaustive: small,
        h_upper: h_upper(q, rho)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LgReport {
    pub map_error: ErrorEstimate,
    /// Euclidean (lattice) decoding on the same trials.
    pub euclid_error: ErrorEstimate,
    /// `Pr((σ̃/σ_s) Z ∉ V(Λ))`.
    pub white_error: ErrorEstimate,
    pub sigma_tilde: f64,
    pub sigma_w: f64,
    pub flatness_tilde: f64,
    pub flatness_s: f64,
    /// `(1 + ε(σ̃)) / (1 - ε(σ_s)) · p̂_w`.
    pub bound: f64,
    pub bound_stderr: f64,
    pub vacuous: bool,
    /// `map ≤ bound + 3·stderr`.
    pub holds: bool,
    /// Rate lower bound in nats per dimension.
    pub rate_lb: f64,
    pub power: f64,
    pub entropy_direct: f64,
    pub entropy_formula: f64,
    pub window_points: usize,
}

/// End-to-end lattice Gaussian coding: `X ~ D_{Λ,σ_s,c}`, `Y = X + Z`,
/// MAP decoding over the Gaussian window, against the flatness-based bound.
pub fn lg_experiment(
    lat: &ConstructionALattice,
    sigma_s: f64,
    sigma_z: f64,
    c: &[f64],
    plan: &TrialPlan,
) -> Result<LgReport> {
    if !(sigma_s > 0.0 && sigma_z > 0.0) {
        return Err(invalid("sigma_s and sigma_z must be positive"));
    }
    let flatness_s = lat.flatness_factor(sigma_s)?;
    if !(flatness_s < 1.0) {
        return Err(Error::VacuousFlatness(flatness_s));
    }
    let st = sigma_tilde(sigma_s, sigma_z);
    let sw = lg_sigma_w(sigma_s, sigma_z);
    let flatness_tilde = lat.flatness_factor(st)?;
    let tbl = discrete_gaussian(lat, sigma_s, c, DEFAULT_GAUSSIAN_TOL)?;
    let n = lat.dim();

    let mut cdf = Vec::with_capacity(tbl.weights.len());
    let mut acc = 0.0;
    for w in &tbl.weights {
        acc += w;
        cdf.push(acc);
    }
    let total = acc;
    let inv_s = 1.0 / (2.0 * sigma_s * sigma_s);
    let inv_z = 1.0 / (2.0 * sigma_z * sigma_z);

    let counts = run_batches(plan, 0, |rng, len| {
        let (mut map_err, mut euc_err) = (0u64, 0u64);
        let mut y = vec![0.0; n];
        for _ in 0..len {
            let u: f64 = rng.random::<f64>() * total;
            let x = cdf.partition_point(|&v| v <= u).min(cdf.len() - 1);
            for (yi, xi) in y.iter_mut().zip(&tbl.points[x]) {
                *yi = xi + sigma_z * rng.sample::<f64, _>(StandardNormal);
            }
            let mut best = (f64::NEG_INFINITY, usize::MAX);
            for (i, pt) in tbl.points.iter().enumerate() {
                let d2: f64 = pt.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
                let score = -tbl.sq_dist[i] * inv_s - d2 * inv_z;
                if score > best.0 {
                    best = (score, i);
                }
            }
            if best.1 != x {
                map_err += 1;
            }
            if lat.decode_integer(&y)? != tbl.integers[x] {
                euc_err += 1;
            }
        }
        Ok((map_err, euc_err))
    })?;
    let map_error = ErrorEstimate::from_counts(counts.iter().map(|c| c.0).sum(), plan.trials);
    let euclid_error = ErrorEstimate::from_counts(counts.iter().map(|c| c.1).sum(), plan.trials);

    let white_error = super::decode::decode_error_in_domain(lat, sw, plan, WHITE_NOISE_DOMAIN)?;
    let factor = (1.0 + flatness_tilde) / (1.0 - flatness_s);
    let bound = factor * white_error.p_hat;
    let bound_stderr = factor * white_error.stderr;
    let slack = 3.0 * map_error.stderr.hypot(bound_stderr);
    let power = signal_power(&tbl);
    let (entropy_direct, entropy_formula) = entropy_lattice_gaussian(&tbl);
    Ok(LgReport {
        map_error,
        euclid_error,
        white_error,
        sigma_tilde: st,
        sigma_w: sw,
        flatness_tilde,
        flatness_s,
        bound,
        bound_stderr,
        vacuous: bound >= 1.0,
        holds: map_error.p_hat <= bound + slack,
        rate_lb: rate_lower_bound(lat, sigma_s, sigma_z, flatness_s, power)?,
        power,
        entropy_direct,
        entropy_formula,
        window_points: tbl.points.len(),
    })
}
