//! Parameter quadruples and the parameter-selection rules.
//!
//! A quadruple `(n, k, p, a)` fixes the block length, code dimension, prime
//! alphabet and scale of the ensemble `a(C(M) + pZ^n)`. Every threshold test
//! here is evaluated on natural logarithms so that quantities such as
//! `(δ'n)^{n/(2k)}` never overflow.

pub(crate) mod prime;

pub use prime::{is_prime, next_prime};

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// `2 / (πe)`, the smallest admissible δ' in the compatibility condition.
pub const DELTA_PRIME_MIN: f64 = 2.0 / (PI * E);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawQuadruple", into = "RawQuadruple")]
pub struct ParameterQuadruple {
    n: usize,
    k: usize,
    p: u64,
    a: f64,
}

#[derive(Serialize, Deserialize)]
struct RawQuadruple {
    n: usize,
    k: usize,
    p: u64,
    a: f64,
}

impl TryFrom<RawQuadruple> for ParameterQuadruple {
    type Error = Error;
    fn try_from(r: RawQuadruple) -> Result<Self> {
        ParameterQuadruple::new(r.n, r.k, r.p, r.a)
    }
}

impl From<ParameterQuadruple> for RawQuadruple {
    fn from(q: ParameterQuadruple) -> Self {
        RawQuadruple {
            n: q.n,
            k: q.k,
            p: q.p,
            a: q.a,
        }
    }
}

impl ParameterQuadruple {
    pub fn new(n: usize, k: usize, p: u64, a: f64) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("block length n = {n} must be at least 2")));
        }
        if k == 0 || k >= n {
            return Err(invalid(format!(
                "code dimension k = {k} must lie in [1, {}]",
                n - 1
            )));
        }
        if !is_prime(p) {
            return Err(invalid(format!("p = {p} is not prime")));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(invalid(format!(
                "scale a = {a} must be positive and finite"
            )));
        }
        let q = Self { n, k, p, a };
        if !q.log_volume().is_finite() {
            return Err(invalid("fundamental volume is not finite"));
        }
        Ok(q)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn with_scale(&self, a: f64) -> Result<Self> {
        Self::new(self.n, self.k, self.p, a)
    }

    /// `ln V = n ln a + (n - k) ln p`.
    pub fn log_volume(&self) -> f64 {
        self.n as f64 * self.a.ln() + (self.n - self.k) as f64 * (self.p as f64).ln()
    }

    /// Fundamental volume `a^n p^{n-k}` of `aΛ(M)` for full-rank `M`.
    pub fn volume(&self) -> f64 {
        self.log_volume().exp()
    }

    /// `V^{2/n}`.
    pub fn volume_2n(&self) -> f64 {
        (2.0 * self.log_volume() / self.n as f64).exp()
    }

    /// Volume-to-noise ratio `V^{2/n} / σ²`.
    pub fn vnr(&self, sigma: f64) -> f64 {
        self.volume_2n() / (sigma * sigma)
    }

    /// `ε = V^{2/n} / (2πe σ_w²) - 1`.
    pub fn epsilon(&self, sigma_w: f64) -> f64 {
        self.vnr(sigma_w) / (2.0 * PI * E) - 1.0
    }

    /// `p^{1 - k/n}`.
    pub fn prime_ratio(&self) -> f64 {
        ((1.0 - self.k as f64 / self.n as f64) * (self.p as f64).ln()).exp()
    }

    /// `p^{k - n}`, the mass bound on rank-deficient matrices.
    pub fn rank_deficiency_bound(&self) -> f64 {
        (-((self.n - self.k) as f64) * (self.p as f64).ln()).exp()
    }

    /// `log10(p^k)`, the size of the message set.
    pub fn log_messages(&self) -> f64 {
        self.k as f64 * (self.p as f64).ln()
    }
}

/// Per-component standard deviation of the channel noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    sigma_w: f64,
}

impl NoiseModel {
    pub fn new(sigma_w: f64) -> Result<Self> {
        if !(sigma_w.is_finite() && sigma_w > 0.0) {
            return Err(invalid(format!("sigma_w = {sigma_w} must be positive")));
        }
        Ok(Self { sigma_w })
    }

    pub fn sigma_w(&self) -> f64 {
        self.sigma_w
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub quad: ParameterQuadruple,
    pub sigma_w: f64,
}

/// A sequence of quadruples indexed by strictly increasing block length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSchedule {
    entries: Vec<ScheduleEntry>,
    pub description: String,
}

impl ParameterSchedule {
    pub fn new(entries: Vec<ScheduleEntry>, description: impl Into<String>) -> Result<Self> {
        for w in entries.windows(2) {
            if w[1].quad.n() <= w[0].quad.n() {
                return Err(invalid("schedule entries must be strictly increasing in n"));
            }
        }
        if let Some(e) = entries.iter().find(|e| !(e.sigma_w > 0.0)) {
            return Err(invalid(format!("sigma_w = {} must be positive", e.sigma_w)));
        }
        Ok(Self {
            entries,
            description: description.into(),
        })
    }

    pub fn entries(&self) -> &[ScheduleEntry] {
        &self.entries
    }
}

/// Scale `a` for which `V^{2/n} / (2πe σ_w²) - 1 = ε`.
pub fn solve_scale(n: usize, k: usize, p: u64, sigma_w: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > -1.0) {
        return Err(invalid(format!("epsilon = {epsilon} must exceed -1")));
    }
    if !(sigma_w > 0.0) {
        return Err(invalid(format!("sigma_w = {sigma_w} must be positive")));
    }
    if n < 2 || k == 0 || k >= n {
        return Err(invalid(format!("(n, k) = ({n}, {k}) is not admissible")));
    }
    let ln_a = 0.5 * (2.0 * PI * E * sigma_w * sigma_w * (1.0 + epsilon)).ln()
        - (n - k) as f64 / n as f64 * (p as f64).ln();
    Ok(ln_a.exp())
}

/// Compatibility condition: `p > max((δ'n)^{n/(2k)}, ((1/π) ln n)^{n/(2(n-k))})`.
pub fn check_mac(n: usize, k: usize, p: u64, delta_prime: f64) -> bool {
    let (nf, kf) = (n as f64, k as f64);
    let t1 = nf / (2.0 * kf) * (delta_prime * nf).ln();
    let t2 = nf / (2.0 * (nf - kf)) * (nf.ln() / PI).ln();
    (p as f64).ln() > t1.max(t2)
}

/// Prime condition for reliable nearest-neighbour decoding:
/// `p > (2δn / (πe(1+ε)))^{n/(2k)}`.
pub fn check_pe_prime(n: usize, k: usize, p: u64, delta: f64, epsilon: f64) -> bool {
    (p as f64).ln() > log_pe_prime_threshold(n, k, delta, epsilon)
}

/// Natural log of the prime threshold used by [`check_pe_prime`].
pub fn log_pe_prime_threshold(n: usize, k: usize, delta: f64, epsilon: f64) -> f64 {
    let nf = n as f64;
    nf / (2.0 * k as f64) * (2.0 * delta * nf / (PI * E * (1.0 + epsilon))).ln()
}

/// `(δ'n)^{(1/2)(1 + ln ln n / ln n)}` with `δ' = 2/(πe)`.
pub fn lg_prime_threshold(n: usize) -> f64 {
    let nf = n as f64;
    let expo = 0.5 * (1.0 + nf.ln().ln() / nf.ln());
    (expo * (DELTA_PRIME_MIN * nf).ln()).exp()
}

/// Lower end `n ln n / ln(n ln n)` of the dimension range.
pub fn lg_dimension_floor(n: usize) -> f64 {
    let nf = n as f64;
    nf * nf.ln() / (nf * nf.ln()).ln()
}

/// `σ̃ = σ_s² / sqrt(σ_s² + σ_z²)`.
pub fn sigma_tilde(sigma_s: f64, sigma_z: f64) -> f64 {
    sigma_s * sigma_s / (sigma_s * sigma_s + sigma_z * sigma_z).sqrt()
}

/// Effective noise `σ_w = (σ̃/σ_s) σ_z` for lattice Gaussian coding.
pub fn lg_sigma_w(sigma_s: f64, sigma_z: f64) -> f64 {
    sigma_tilde(sigma_s, sigma_z) / sigma_s * sigma_z
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LgSuggestion {
    pub quad: ParameterQuadruple,
    pub sigma_w: f64,
    pub sigma_tilde: f64,
    pub prime_threshold: f64,
}

/// Parameters for lattice Gaussian coding at block length `n`.
///
/// `p` is the first prime above [`lg_prime_threshold`], `k` is the smallest
/// integer at or above [`lg_dimension_floor`] that satisfies [`check_mac`],
/// and `a` makes the VNR at `σ_w` equal to `gamma`.
pub fn suggest_lg_parameters(
    n: usize,
    sigma_s: f64,
    sigma_z: f64,
    eta: f64,
    gamma: f64,
) -> Result<LgSuggestion> {
    if !(sigma_s > 0.0 && sigma_z > 0.0) {
        return Err(invalid("sigma_s and sigma_z must be positive"));
    }
    let snr = sigma_s * sigma_s / (sigma_z * sigma_z);
    if !(snr > E) {
        return Err(Error::Precondition(format!(
            "sigma_s^2/sigma_z^2 = {snr} must exceed e"
        )));
    }
    let eta_max = 0.5 * (snr / E).ln();
    if !(eta > 0.0 && eta < eta_max) {
        return Err(Error::Precondition(format!(
            "eta = {eta} must lie in (0, {eta_max})"
        )));
    }
    let g_lo = 2.0 * PI * E;
    let g_hi = 2.0 * PI * (1.0 + 2.0 * eta).exp();
    if !(gamma > g_lo && gamma <= g_hi) {
        return Err(Error::Precondition(format!(
            "gamma = {gamma} must lie in ({g_lo}, {g_hi}]"
        )));
    }
    if n < 2 {
        return Err(invalid("n must be at least 2"));
    }
    let prime_threshold = lg_prime_threshold(n);
    let p = next_prime(prime_threshold)?;
    let k_start = (lg_dimension_floor(n).ceil() as usize).max(1);
    let k = (k_start..n)
        .find(|&k| check_mac(n, k, p, DELTA_PRIME_MIN))
        .ok_or(Error::NoFeasibleDimension { n, p, max_k: n - 1 })?;
    let sigma_t = sigma_tilde(sigma_s, sigma_z);
    let sigma_w = sigma_t / sigma_s * sigma_z;
    // a² p^{2(n-k)/n} / σ_w² = γ
    let ln_a = sigma_w.ln() + 0.5 * gamma.ln() - (n - k) as f64 / n as f64 * (p as f64).ln();
    let quad = ParameterQuadruple::new(n, k, p, ln_a.exp())?;
    Ok(LgSuggestion {
        quad,
        sigma_w,
        sigma_tilde: sigma_t,
        prime_threshold,
    })
}

/// Schedule satisfying the reliable-decoding prime condition: `k = round(κn)`,
/// `p` the first prime above the threshold of [`check_pe_prime`], and `a`
/// from [`solve_scale`] at fixed `ε`.
pub fn pe_schedule(
    ns: &[usize],
    k_fraction: f64,
    delta: f64,
    epsilon: f64,
    sigma_w: f64,
) -> Result<ParameterSchedule> {
    if !(k_fraction > 0.0 && k_fraction < 1.0) {
        return Err(invalid(format!(
            "k_fraction = {k_fraction} must lie in (0, 1)"
        )));
    }
    if !(delta > 1.0 && epsilon > 0.0) {
        return Err(Error::Precondition("need delta > 1 and epsilon > 0".into()));
    }
    let entries = ns
        .iter()
        .map(|&n| {
            let k = ((k_fraction * n as f64).round() as usize).clamp(1, n.saturating_sub(1).max(1));
            let threshold = log_pe_prime_threshold(n, k, delta, epsilon).exp();
            let p = next_prime(threshold.max(1.0))?;
            let a = solve_scale(n, k, p, sigma_w, epsilon)?;
            Ok(ScheduleEntry {
                quad: ParameterQuadruple::new(n, k, p, a)?,
                sigma_w,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ParameterSchedule::new(
        entries,
        format!(
            "reliable-decoding schedule: k = {k_fraction} n, delta = {delta}, epsilon = {epsilon}"
        ),
    )
}

/// Schedule of [`suggest_lg_parameters`] outputs over the given block lengths.
pub fn cm_schedule(
    ns: &[usize],
    sigma_s: f64,
    sigma_z: f64,
    eta: f64,
    gamma: f64,
) -> Result<ParameterSchedule> {
    let entries = ns
        .iter()
        .map(|&n| {
            let s = suggest_lg_parameters(n, sigma_s, sigma_z, eta, gamma)?;
            Ok(ScheduleEntry {
                quad: s.quad,
                sigma_w: s.sigma_w,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ParameterSchedule::new(
        entries,
        format!("lattice Gaussian coding schedule: sigma_s = {sigma_s}, sigma_z = {sigma_z}, eta = {eta}, gamma = {gamma}"),
    )
}

/// The pair `(f, g)` that solves the flatness parametrisation
/// `a = sqrt(π / (τ ln(n/f)))` and `p = (ln(n/g) / (π V^{2/n} τ))^{n/(2k)}`:
/// `f = n e^{-π/(a²τ)}` and `g = n e^{-π V^{2/n} τ p^{2k/n}}`.
pub fn ff_f_g(q: &ParameterQuadruple, tau: f64) -> (f64, f64) {
    let nf = q.n() as f64;
    let a2 = q.a() * q.a();
    let f = nf * (-PI / (a2 * tau)).exp();
    let v2 = q.volume_2n();
    let p2k = (2.0 * q.k() as f64 / nf * (q.p() as f64).ln()).exp();
    let g = nf * (-PI * v2 * tau * p2k).exp();
    (f, g)
}
