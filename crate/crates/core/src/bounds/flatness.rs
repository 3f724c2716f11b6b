use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gf::{ln_one_minus_xi_uniform, xi_stats, xi_zero_uniform, EnsembleSpec, XiStats};
use crate::numeric::compensated_sum;
use crate::params::{ff_f_g, ParameterQuadruple, ParameterSchedule};
use crate::theta::{jacobi_theta_excess, jacobi_theta_excess_direct};

/// Relative tolerance between the two algebraically equal forms of `A^Fl`.
pub const AFL_DUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatnessBoundReport {
    /// `p^k ξ^max Θ_{Z^n}(a²τ) + p^k(ξ^(0) - ξ^max) Θ_{Z^n}(a²p²τ)`.
    pub a_fl: f64,
    /// The same quantity with the first theta rewritten through the functional equation.
    pub a_fl_dual: f64,
    /// `Θ_{Z^n}(a²τ)`.
    pub theta_small: f64,
    /// `Θ_{Z^n}(1/(a²τ))`.
    pub theta_small_dual: f64,
    /// `Θ_{Z^n}(a²p²τ)`.
    pub theta_big: f64,
    /// `V τ^{n/2} A^Fl / (1 - p^{k-n}) - 1`.
    pub b_fl: f64,
}

fn ln_theta_zn_direct(n: usize, tau: f64) -> Result<f64> {
    Ok(n as f64 * jacobi_theta_excess_direct(tau)?.value.ln_1p())
}

fn ln_theta_zn(n: usize, tau: f64) -> Result<f64> {
    Ok(n as f64 * jacobi_theta_excess(tau)?.value.ln_1p())
}

fn check_tau(tau: f64) -> Result<()> {
    if tau.is_finite() && tau > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("tau = {tau} must be positive and finite")))
    }
}

/// `ln(ξ^(0) - ξ^max)`.
fn ln_xi_gap(ln_xi_zero: f64, ln_xi_max: f64) -> f64 {
    if ln_xi_max == f64::NEG_INFINITY {
        return ln_xi_zero;
    }
    ln_xi_zero + (-(ln_xi_max - ln_xi_zero).exp()).ln_1p()
}

/// `V τ^{n/2} A^Fl / (1 - d) - 1`, assembled as
/// `(expm1(ln X1) + X2 + d) / (1 - d)` with
/// `X1 = p^n ξ^max Θ_{Z^n}(1/(a²τ))` and `X2 = V τ^{n/2} p^k (ξ^(0) - ξ^max) Θ_{Z^n}(a²p²τ)`.
fn assemble_b_fl(
    q: &ParameterQuadruple,
    tau: f64,
    ln_pn_xi_max: f64,
    ln_gap: f64,
    deficiency: f64,
) -> Result<f64> {
    let n = q.n();
    let nf = n as f64;
    let a2 = q.a() * q.a();
    let lp = (q.p() as f64).ln();
    let ln_x1 = ln_pn_xi_max + ln_theta_zn(n, 1.0 / (a2 * tau))?;
    let ln_x2 = q.log_volume()
        + nf / 2.0 * tau.ln()
        + q.k() as f64 * lp
        + ln_gap
        + ln_theta_zn(n, a2 * (q.p() * q.p()) as f64 * tau)?;
    let x1m1 = if ln_x1 == f64::NEG_INFINITY {
        -1.0
    } else {
        ln_x1.exp_m1()
    };
    Ok(compensated_sum([x1m1, ln_x2.exp(), deficiency]) / (1.0 - deficiency))
}

/// `A^Fl` for the given collision statistics, with both evaluation forms.
///
/// Both forms sum their theta series directly (never through the functional
/// equation), so agreement is a genuine check on truncation.
pub fn a_fl(q: &ParameterQuadruple, stats: &XiStats, tau: f64) -> Result<FlatnessBoundReport> {
    check_tau(tau)?;
    let n = q.n();
    let nf = n as f64;
    let a2 = q.a() * q.a();
    let lp = (q.p() as f64).ln();
    let k_lp = q.k() as f64 * lp;

    let ln_small = ln_theta_zn_direct(n, a2 * tau)?;
    let ln_small_dual = ln_theta_zn_direct(n, 1.0 / (a2 * tau))?;
    let ln_big = ln_theta_zn(n, a2 * (q.p() * q.p()) as f64 * tau)?;
    let ln_gap = ln_xi_gap(stats.xi_zero.ln(), stats.ln_xi_max);

    let ln_t1 = k_lp + stats.ln_xi_max + ln_small;
    let ln_t1_dual =
        -q.log_volume() + nf * lp - nf / 2.0 * tau.ln() + stats.ln_xi_max + ln_small_dual;
    let t2 = (k_lp + ln_gap + ln_big).exp();
    let a = ln_t1.exp() + t2;
    let a_dual = ln_t1_dual.exp() + t2;
    if stats.ln_xi_max > f64::NEG_INFINITY {
        let rel = (ln_t1_dual - ln_t1).exp_m1().abs();
        if !(rel <= AFL_DUAL_TOL) {
            return Err(Error::ThetaDisagreement {
                direct: a,
                dual: a_dual,
            });
        }
    }
    let deficiency = q.rank_deficiency_bound();
    let b = assemble_b_fl(q, tau, nf * lp + stats.ln_xi_max, ln_gap, deficiency)?;
    Ok(FlatnessBoundReport {
        a_fl: a,
        a_fl_dual: a_dual,
        theta_small: ln_small.exp(),
        theta_small_dual: ln_small_dual.exp(),
        theta_big: ln_big.exp(),
        b_fl: b,
    })
}

/// Bound on the mean flatness factor of a uniformly drawn full-rank lattice at
/// `σ = 1/√(2πτ)`, via the uniform-matrix statistics and the full-rank
/// comparison `E[f(U')] ≥ (1 - p^{k-n}) E[f(U)]`. Works at any scale.
pub fn b_fl(q: &ParameterQuadruple, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    let (n, k, p) = (q.n(), q.k(), q.p());
    let lp = (p as f64).ln();
    // ln(p^n ξ^max) = ln(1 - ξ) - ln(1 - p^{-n})
    let ln_pn_xi_max = ln_one_minus_xi_uniform(n, k, p) - (-(-(n as f64) * lp).exp()).ln_1p();
    let ln_xi_max = ln_pn_xi_max - n as f64 * lp;
    let ln_gap = ln_xi_gap(xi_zero_uniform(n, k, p).ln(), ln_xi_max);
    assemble_b_fl(q, tau, ln_pn_xi_max, ln_gap, q.rank_deficiency_bound())
}

/// The same bound from exhaustively enumerated full-rank statistics (no
/// `1 - p^{k-n}` correction needed). Only feasible at desk scale.
pub fn b_fl_full_rank(q: &ParameterQuadruple, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    let s = xi_stats(&EnsembleSpec::FullRankOnly, q)?;
    let lp = (q.p() as f64).ln();
    let ln_gap = ln_xi_gap(s.xi_zero.ln(), s.ln_xi_max);
    assemble_b_fl(q, tau, q.n() as f64 * lp + s.ln_xi_max, ln_gap, 0.0)
}

/// `τ_1 = 1/(2πσ̃²)`, `τ_2 = 1/(2(π - t)σ_s²)`, `τ_3 = 1/(2πσ_s²)` with
/// `t = πσ_z²/(2(σ_s² + σ_z²))`, which keeps the three strictly decreasing.
pub fn lg_flatness_taus(sigma_s: f64, sigma_z: f64) -> [f64; 3] {
    let (s2, z2) = (sigma_s * sigma_s, sigma_z * sigma_z);
    let st2 = s2 * s2 / (s2 + z2);
    let t = PI * z2 / (2.0 * (s2 + z2));
    [
        1.0 / (2.0 * PI * st2),
        1.0 / (2.0 * (PI - t) * s2),
        1.0 / (2.0 * PI * s2),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FfRow {
    pub n: usize,
    pub k: usize,
    pub p: u64,
    pub a: f64,
    pub j: usize,
    pub tau: f64,
    /// `τ_1 V^{2/n}`; must stay below 1.
    pub tau1_v2n: f64,
    pub f: f64,
    pub g: f64,
    pub b_fl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FfCheck {
    pub rows: Vec<FfRow>,
    /// Human-readable hypothesis violations; empty when every check passes.
    pub violations: Vec<String>,
}

impl FfCheck {
    fn column(&self, j: usize, pick: impl Fn(&FfRow) -> f64) -> Vec<f64> {
        self.rows.iter().filter(|r| r.j == j).map(pick).collect()
    }

    fn taus(&self) -> usize {
        self.rows.iter().map(|r| r.j + 1).max().unwrap_or(0)
    }

    fn strictly_decreasing(v: &[f64]) -> bool {
        v.windows(2).all(|w| w[1] < w[0])
    }

    pub fn f_decreasing(&self) -> bool {
        (0..self.taus()).all(|j| Self::strictly_decreasing(&self.column(j, |r| r.f)))
    }

    pub fn g_decreasing(&self) -> bool {
        (0..self.taus()).all(|j| Self::strictly_decreasing(&self.column(j, |r| r.g)))
    }

    pub fn b_fl_decreasing(&self) -> bool {
        (0..self.taus()).all(|j| Self::strictly_decreasing(&self.column(j, |r| r.b_fl)))
    }
}

/// Evaluate the flatness-theorem hypotheses and `B^Fl` along a schedule.
pub fn theorem_ff_check(schedule: &ParameterSchedule, taus: &[f64]) -> Result<FfCheck> {
    if taus.is_empty() {
        return Err(invalid("at least one tau is required"));
    }
    if taus.iter().any(|&t| !(t > 0.0)) || taus.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("taus must be positive and strictly decreasing"));
    }
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    let mut prev_codim: Option<f64> = None;
    for e in schedule.entries() {
        let q = &e.quad;
        let tau1_v2n = taus[0] * q.volume_2n();
        if !(tau1_v2n < 1.0) {
            violations.push(format!(
                "n = {}: tau_1 V^(2/n) = {tau1_v2n} is not below 1",
                q.n()
            ));
        }
        let codim = (q.n() - q.k()) as f64 * (q.p() as f64).ln();
        if let Some(prev) = prev_codim {
            if codim <= prev {
                violations.push(format!("n = {}: p^(n-k) does not increase", q.n()));
            }
        }
        prev_codim = Some(codim);
        for (j, &tau) in taus.iter().enumerate() {
            let (f, g) = ff_f_g(q, tau);
            rows.push(FfRow {
                n: q.n(),
                k: q.k(),
                p: q.p(),
                a: q.a(),
                j,
                tau,
                tau1_v2n,
                f,
                g,
                b_fl: b_fl(q, tau)?,
            });
        }
    }
    let check = FfCheck { rows, violations };
    let mut extra = Vec::new();
    if !check.f_decreasing() {
        extra.push("f_j(n) is not decreasing in n".to_string());
    }
    if !check.g_decreasing() {
        extra.push("g_j(n) is not decreasing in n".to_string());
    }
    Ok(FfCheck {
        violations: [check.violations, extra].concat(),
        rows: check.rows,
    })
}
