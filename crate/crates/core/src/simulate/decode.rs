use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{batch_rng, run_batches, ErrorEstimate, TrialPlan};
use crate::bounds::{b_nn_upper, NNBoundReport};
use crate::error::{invalid, Result};
use crate::gf::{sample_matrix, EnsembleSpec};
use crate::lattice::ConstructionALattice;
use crate::params::ParameterQuadruple;

const MATRIX_DOMAIN: u32 = 0xFF_FFFF;

fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize, sigma: f64) -> Vec<f64> {
    (0..n)
        .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

pub(super) fn decode_error_in_domain(
    lat: &ConstructionALattice,
    sigma_w: f64,
    plan: &TrialPlan,
    domain: u32,
) -> Result<ErrorEstimate> {
    if !(sigma_w > 0.0) {
        return Err(invalid(format!("sigma_w = {sigma_w} must be positive")));
    }
    let n = lat.dim();
    let counts = run_batches(plan, domain, |rng, len| {
        let mut errors = 0u64;
        for _ in 0..len {
            let w = gaussian_vector(rng, n, sigma_w);
            if !lat.decodes_to_origin(&w)? {
                errors += 1;
            }
        }
        Ok(errors)
    })?;
    Ok(ErrorEstimate::from_counts(counts.iter().sum(), plan.trials))
}

/// Monte Carlo estimate of `Pr(W ∉ V(Λ))` for `W ~ N(0, σ_w² I)`.
pub fn estimate_decode_error(
    lat: &ConstructionALattice,
    sigma_w: f64,
    plan: &TrialPlan,
) -> Result<ErrorEstimate> {
    decode_error_in_domain(lat, sigma_w, plan, 0)
}

/// Monte Carlo estimate of `Pr(‖W‖ > r)`.
pub fn empirical_norm_tail(
    n: usize,
    sigma: f64,
    r: f64,
    plan: &TrialPlan,
) -> Result<ErrorEstimate> {
    let r2 = r * r;
    let counts = run_batches(plan, 0, |rng, len| {
        Ok((0..len)
            .filter(|_| {
                gaussian_vector(rng, n, sigma)
                    .iter()
                    .map(|x| x * x)
                    .sum::<f64>()
                    > r2
            })
            .count() as u64)
    })?;
    Ok(ErrorEstimate::from_counts(counts.iter().sum(), plan.trials))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleErrorReport {
    /// All trials pooled over all matrices.
    pub mean: ErrorEstimate,
    pub per_matrix: Vec<ErrorEstimate>,
    /// Larger of the pooled binomial error and the between-matrix standard error.
    pub combined_stderr: f64,
    pub bound: NNBoundReport,
    pub vacuous: bool,
    /// `mean ≤ min(1, bound) + 3·combined_stderr`.
    pub holds: bool,
}

/// Average decoding error over sampled matrices, against the analytic bound.
pub fn ensemble_error_vs_bound(
    q: &ParameterQuadruple,
    ens: &EnsembleSpec,
    sigma_w: f64,
    matrices: usize,
    plan: &TrialPlan,
) -> Result<EnsembleErrorReport> {
    if matrices == 0 {
        return Err(invalid("at least one matrix is required"));
    }
    let bound = b_nn_upper(q, sigma_w)?;
    let mut mrng = batch_rng(plan.seed, MATRIX_DOMAIN, 0);
    let mut per_matrix = Vec::with_capacity(matrices);
    for i in 0..matrices {
        let m = sample_matrix(ens, q, &mut mrng)?;
        let lat = ConstructionALattice::new(*q, m)?;
        per_matrix.push(decode_error_in_domain(&lat, sigma_w, plan, i as u32 + 1)?);
    }
    let errors: u64 = per_matrix.iter().map(|e| e.errors).sum();
    let trials: u64 = per_matrix.iter().map(|e| e.trials).sum();
    let mean = ErrorEstimate::from_counts(errors, trials);
    let between = if matrices > 1 {
        let mu = per_matrix.iter().map(|e| e.p_hat).sum::<f64>() / matrices as f64;
        let var = per_matrix
            .iter()
            .map(|e| (e.p_hat - mu).powi(2))
            .sum::<f64>()
            / (matrices - 1) as f64;
        (var / matrices as f64).sqrt()
    } else {
        0.0
    };
    let combined_stderr = mean.stderr.max(between);
    let vacuous = bound.is_vacuous();
    let holds = mean.p_hat <= bound.total.min(1.0) + 3.0 * combined_stderr;
    Ok(EnsembleErrorReport {
        mean,
        per_matrix,
        combined_stderr,
        bound,
        vacuous,
        holds,
    })
}
