//! Theta series, flatness factors, error exponents and ball volumes.
//!
//! One-dimensional series are summed until the geometric tail bound
//! `e^{-πτz²}/(1 - e^{-πτ(2z+1)})` drops below [`THETA_TOL`]. Below `τ = 1`
//! the Poisson-summed form is used instead so the term count stays small.
//! `Θ_{Z^n}` is assembled as `exp(n ln θ)` with `θ - 1` tracked separately,
//! which keeps `Θ - 1` accurate when it is far below machine epsilon.

mod ball;
mod exponent;

pub use ball::{ball_volume, ball_volume_bound, ln_ball_volume, ln_ball_volume_bound};
pub use exponent::{chernoff_tail, e_p_un, e_sp, e_t, ln_chernoff_tail, ExponentCurve, ExponentFn};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gf::GeneratorMatrix;
use crate::numeric::{compensated_sum, Truncated};

/// Truncation tolerance for every one-dimensional factor.
pub const THETA_TOL: f64 = 1e-15;

/// A theta-series value with its truncation budget.
pub type ThetaValue = Truncated;

fn check_tau(tau: f64) -> Result<()> {
    if tau.is_finite() && tau > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("tau = {tau} must be positive and finite")))
    }
}

fn side_tail(tau: f64, z: f64) -> f64 {
    (-PI * tau * z * z).exp() / -(-PI * tau * (2.0 * z + 1.0)).exp_m1()
}

/// `2 Σ_{z≥1} e^{-πτz²}` by direct summation.
fn excess_direct(tau: f64) -> Truncated {
    let mut terms = Vec::new();
    let mut z = 1.0f64;
    loop {
        let tail = side_tail(tau, z);
        if tail < THETA_TOL / 2.0 {
            return Truncated {
                value: 2.0 * compensated_sum(terms),
                abs_error: 2.0 * tail,
            };
        }
        terms.push((-PI * tau * z * z).exp());
        z += 1.0;
    }
}

/// `θ(0, iτ) - 1`, switching to `τ^{-1/2} θ(0, i/τ)` below `τ = 1`.
pub fn jacobi_theta_excess(tau: f64) -> Result<Truncated> {
    check_tau(tau)?;
    if tau >= 1.0 {
        return Ok(excess_direct(tau));
    }
    let dual = excess_direct(1.0 / tau);
    let s = tau.sqrt();
    Ok(Truncated {
        value: (1.0 + dual.value) / s - 1.0,
        abs_error: dual.abs_error / s,
    })
}

/// `θ(0, iτ) = Σ_{z∈Z} e^{-πτz²}`.
pub fn jacobi_theta(tau: f64) -> Result<ThetaValue> {
    let e = jacobi_theta_excess(tau)?;
    Ok(Truncated {
        value: 1.0 + e.value,
        abs_error: e.abs_error,
    })
}

/// `θ(0, iτ) - 1` by direct summation only.
pub fn jacobi_theta_excess_direct(tau: f64) -> Result<Truncated> {
    check_tau(tau)?;
    Ok(excess_direct(tau))
}

/// `θ(0, iτ)` by direct summation only, never through the functional equation.
pub fn jacobi_theta_direct(tau: f64) -> Result<ThetaValue> {
    check_tau(tau)?;
    let e = excess_direct(tau);
    Ok(Truncated {
        value: 1.0 + e.value,
        abs_error: e.abs_error,
    })
}

/// `ln Θ_{Z^n}(τ) = n ln θ(0, iτ)`.
pub fn ln_theta_zn(n: usize, tau: f64) -> Result<f64> {
    Ok(n as f64 * jacobi_theta_excess(tau)?.value.ln_1p())
}

/// `Θ_{Z^n}(τ) - 1`, accurate when the value is close to zero.
pub fn theta_zn_excess(n: usize, tau: f64) -> Result<f64> {
    Ok(ln_theta_zn(n, tau)?.exp_m1())
}

/// `Θ_{Z^n}(τ) = θ(0, iτ)^n` with the per-factor error compounded n-fold.
pub fn theta_zn(n: usize, tau: f64) -> Result<ThetaValue> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let e = jacobi_theta_excess(tau)?;
    let ln = n as f64 * e.value.ln_1p();
    let rel = e.abs_error / (1.0 + e.value);
    let value = ln.exp();
    Ok(Truncated {
        value,
        abs_error: value * (n as f64 * rel).exp_m1(),
    })
}

/// Relative residual of `Θ_{Z^n}(t) = t^{-n/2} Θ_{Z^n}(1/t)` with both sides
/// summed directly.
pub fn check_functional_equation(n: usize, t: f64) -> Result<f64> {
    check_tau(t)?;
    let nf = n as f64;
    let lhs = nf * (jacobi_theta_direct(t)?.value - 1.0).ln_1p();
    let rhs = -nf / 2.0 * t.ln() + nf * (jacobi_theta_direct(1.0 / t)?.value - 1.0).ln_1p();
    Ok((rhs - lhs).exp_m1().abs())
}

/// `Σ_{z∈Z} e^{-πτ(δ+z)²}`; `δ` is reduced modulo 1.
pub fn theta_shifted_1d(delta: f64, tau: f64) -> Result<ThetaValue> {
    check_tau(tau)?;
    if !delta.is_finite() {
        return Err(Error::OutOfRange(delta));
    }
    let d = delta.rem_euclid(1.0);
    if tau >= 1.0 {
        Ok(shifted_direct(d, tau))
    } else {
        Ok(shifted_poisson(d, tau))
    }
}

fn shifted_direct(d: f64, tau: f64) -> Truncated {
    let mut terms = Vec::new();
    let mut m = 0.0f64;
    loop {
        terms.push((-PI * tau * (m + d).powi(2)).exp());
        terms.push((-PI * tau * (m + 1.0 - d).powi(2)).exp());
        let sum = compensated_sum(terms.iter().copied());
        // Every omitted term sits at distance at least m + 1 on either side.
        let tail = 2.0 * side_tail(tau, m + 1.0);
        // At large τ every term can underflow; the tail is then below any scale too.
        if tail < THETA_TOL * sum || tail < f64::MIN_POSITIVE {
            return Truncated {
                value: sum,
                abs_error: tail,
            };
        }
        m += 1.0;
    }
}

fn shifted_poisson(d: f64, tau: f64) -> Truncated {
    let inv = 1.0 / tau;
    let mut terms = vec![1.0];
    let mut k = 1.0f64;
    loop {
        let tail = 2.0 * side_tail(inv, k);
        if tail < THETA_TOL / 2.0 {
            let s = tau.sqrt();
            return Truncated {
                value: compensated_sum(terms) / s,
                abs_error: tail / s,
            };
        }
        terms.push(2.0 * (-PI * inv * k * k).exp() * (2.0 * PI * k * d).cos());
        k += 1.0;
    }
}

/// Theta series of `aΛ` from the distinct codewords of its code:
/// `Σ_c ∏_i θ_{c_i/p}(a²p²τ)`.
pub(crate) fn coset_theta<'a, I>(codewords: I, p: u64, a: f64, tau: f64) -> Result<ThetaValue>
where
    I: IntoIterator<Item = &'a [u64]>,
{
    check_tau(tau)?;
    let t = a * a * (p * p) as f64 * tau;
    let factors: Vec<Truncated> = (0..p)
        .map(|r| theta_shifted_1d(r as f64 / p as f64, t))
        .collect::<Result<_>>()?;
    let ln_f: Vec<f64> = factors.iter().map(|f| f.value.ln()).collect();
    let rel: Vec<f64> = factors.iter().map(Truncated::rel_error).collect();
    let ln_upper: Vec<f64> = factors
        .iter()
        .map(|f| (f.value + f.abs_error).ln())
        .collect();
    let mut values = Vec::new();
    let mut errors = Vec::new();
    for c in codewords {
        let (l, r) = c.iter().fold((0.0, 0.0), |(l, r), &ci| {
            (l + ln_f[ci as usize], r + rel[ci as usize])
        });
        let v = l.exp();
        values.push(v);
        if v > 0.0 {
            errors.push(v * r.exp_m1());
        } else {
            errors.push(c.iter().map(|&ci| ln_upper[ci as usize]).sum::<f64>().exp());
        }
    }
    Ok(Truncated {
        value: compensated_sum(values),
        abs_error: compensated_sum(errors),
    })
}

/// `Θ_{aΛ(M)}(τ)` by coset decomposition over the distinct codewords of `C(M)`.
pub fn theta_construction_a(m: &GeneratorMatrix, a: f64, tau: f64) -> Result<ThetaValue> {
    if !(a > 0.0) {
        return Err(invalid(format!("scale a = {a} must be positive")));
    }
    let mut cw = m.enumerate_codewords()?.to_vecs();
    cw.sort_unstable();
    cw.dedup();
    coset_theta(cw.iter().map(Vec::as_slice), m.p(), a, tau)
}

/// Flatness factor `V/(2πσ²)^{n/2} Θ(1/(2πσ²)) - 1` from a precomputed theta value.
///
/// Negative values within the truncation and rounding budget are clipped to 0.
pub fn flatness_factor(lat_volume: f64, n: usize, theta_at: ThetaValue, sigma: f64) -> Result<f64> {
    flatness_factor_ln(lat_volume.ln(), n, theta_at, sigma)
}

/// [`flatness_factor`] taking `ln V`, for volumes outside the `f64` range.
pub fn flatness_factor_ln(
    ln_volume: f64,
    n: usize,
    theta_at: ThetaValue,
    sigma: f64,
) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(invalid(format!("sigma = {sigma} must be positive")));
    }
    let nf = n as f64;
    let l = ln_volume - nf / 2.0 * (2.0 * PI * sigma * sigma).ln() + theta_at.value.ln();
    let eps = l.exp_m1();
    if eps >= 0.0 {
        return Ok(eps);
    }
    let budget = (1.0 + eps) * theta_at.rel_error() + 64.0 * f64::EPSILON * (1.0 + l.abs() + nf);
    if -eps <= budget {
        if eps < 0.0 {
            log::warn!("flatness factor {eps:e} clipped to 0 (budget {budget:e})");
        }
        Ok(0.0)
    } else {
        Err(Error::Precondition(format!(
            "flatness factor {eps:e} is negative beyond the truncation budget {budget:e}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaLimitRow {
    pub n: usize,
    pub c_n: f64,
    pub theta_minus_one: f64,
    /// `n e^{-π c_n}`, which tends to zero exactly when `Θ_{Z^n}(c_n) → 1`.
    pub diagnostic: f64,
}

/// `Θ_{Z^n}(c_n) - 1` along a schedule of block lengths.
pub fn theta_limit_check<F: Fn(usize) -> f64>(c: F, ns: &[usize]) -> Result<Vec<ThetaLimitRow>> {
    ns.iter()
        .map(|&n| {
            let c_n = c(n);
            Ok(ThetaLimitRow {
                n,
                c_n,
                theta_minus_one: theta_zn_excess(n, c_n)?,
                diagnostic: n as f64 * (-PI * c_n).exp(),
            })
        })
        .collect()
}
