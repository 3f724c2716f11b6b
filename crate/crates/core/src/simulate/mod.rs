//! Seeded Monte Carlo and exhaustive verification.
//!
//! Trials are split into fixed-size batches. Batch `b` of experiment domain
//! `d` draws from the ChaCha8 stream `(d << 40) | b` under the plan's seed, and
//! batch results are merged in batch order, so results depend only on
//! `(seed, trials, batch)` and never on the number of workers.

mod decode;
mod lg;
mod verify;

pub use decode::{
    empirical_norm_tail, ensemble_error_vs_bound, estimate_decode_error, EnsembleErrorReport,
};
pub use lg::{estimate_h, lg_experiment, HEstimate, LgReport, EXHAUSTIVE_ENSEMBLE_CAP};
pub use verify::{
    ball_grid, explicit_test_ensembles, run_small_instance_suite, small_instance_grid,
    verify_collision_ratio_bound, verify_counting_averaging, verify_full_rank_comparison,
    verify_point_count_bound, verify_rank_law, verify_sublattice_separation,
    verify_theta_averaging, verify_xi_zero, CheckRow, SuiteReport, GRID_SCALES, GRID_TAUS,
    SMALL_INSTANCE_CAP,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const MAX_BATCHES: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub seed: u64,
    pub trials: u64,
    pub workers: usize,
    pub batch: u64,
}

impl TrialPlan {
    pub fn new(seed: u64, trials: u64, workers: usize, batch: u64) -> Result<Self> {
        if trials == 0 || workers == 0 || batch == 0 {
            return Err(invalid("trials, workers and batch must all be positive"));
        }
        if trials.div_ceil(batch) >= MAX_BATCHES {
            return Err(invalid("too many batches; increase the batch size"));
        }
        Ok(Self {
            seed,
            trials,
            workers,
            batch,
        })
    }

    pub fn with_trials(&self, trials: u64) -> Result<Self> {
        Self::new(self.seed, trials, self.workers, self.batch)
    }

    pub fn num_batches(&self) -> u64 {
        self.trials.div_ceil(self.batch)
    }

    fn batch_len(&self, b: u64) -> u64 {
        self.batch.min(self.trials - b * self.batch)
    }
}

/// Independent generator for batch `batch` of experiment `domain`.
pub fn batch_rng(seed: u64, domain: u32, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << 40) | batch);
    rng
}

/// Run `f(rng, batch_len)` for every batch on `plan.workers` threads; results
/// come back in batch order.
pub(crate) fn run_batches<T, F>(plan: &TrialPlan, domain: u32, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> Result<T> + Sync,
{
    let job = |b: u64| {
        let mut rng = batch_rng(plan.seed, domain, b);
        f(&mut rng, plan.batch_len(b))
    };
    if plan.workers == 1 {
        return (0..plan.num_batches()).map(job).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..plan.num_batches()).into_par_iter().map(job).collect())
}

/// A Bernoulli frequency with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub trials: u64,
    pub errors: u64,
}

impl ErrorEstimate {
    pub fn from_counts(errors: u64, trials: u64) -> Self {
        let p = if trials == 0 {
            0.0
        } else {
            errors as f64 / trials as f64
        };
        let stderr = if trials == 0 {
            0.0
        } else {
            (p * (1.0 - p) / trials as f64).sqrt()
        };
        Self {
            p_hat: p,
            stderr,
            trials,
            errors,
        }
    }
}
