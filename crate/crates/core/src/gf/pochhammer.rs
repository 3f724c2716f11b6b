//! q-Pochhammer products and the rank law of uniform random matrices over `F_p`.

use num_rational::Ratio;

use crate::error::{invalid, Error, Result};
use crate::numeric::{log_sum_exp, Truncated};

const FACTOR_CUTOFF: f64 = 1e-17;

/// `(a; q)_m = ∏_{ℓ<m} (1 - a q^ℓ)`; `m = None` requests the infinite product.
///
/// The infinite product stops once `|a q^ℓ| < 1e-17`; the remaining factors
/// are bounded through `|ln(1-x)| ≤ |x|/(1-|x|)` summed as a geometric series.
pub fn pochhammer(a: f64, q: f64, m: Option<usize>) -> Result<Truncated> {
    match m {
        Some(m) => {
            let mut v = 1.0;
            let mut t = a;
            for _ in 0..m {
                v *= 1.0 - t;
                t *= q;
            }
            Ok(Truncated::exact(v))
        }
        None => {
            if !(q.abs() < 1.0) {
                return Err(invalid(format!(
                    "infinite product diverges for |q| = {}",
                    q.abs()
                )));
            }
            let mut v = 1.0;
            let mut t = a;
            while t.abs() >= FACTOR_CUTOFF {
                v *= 1.0 - t;
                t *= q;
            }
            let x = t.abs();
            let log_tail = x / ((1.0 - q.abs()) * (1.0 - x));
            Ok(Truncated {
                value: v,
                abs_error: v.abs() * log_tail.exp_m1(),
            })
        }
    }
}

/// Euler function `φ(q) = (q; q)_∞`.
pub fn euler_phi(q: f64) -> Result<Truncated> {
    pochhammer(q, q, None)
}

fn check_dims(n: usize, k: usize, j: usize) -> Result<()> {
    if n == 0 || k == 0 {
        return Err(invalid("dimensions must be positive"));
    }
    if j > k.min(n) {
        return Err(Error::OutOfRange(j as f64));
    }
    Ok(())
}

/// Exact number of `n × k` matrices over `F_p` with rank `j`:
/// `∏_{i<j} (p^n - p^i)(p^k - p^i) / (p^j - p^i)`.
pub fn rank_count(n: usize, k: usize, p: u64, j: usize) -> Result<u128> {
    check_dims(n, k, j)?;
    let overflow = || {
        invalid(format!(
            "rank count overflows for (n, k, p) = ({n}, {k}, {p})"
        ))
    };
    let pw = |e: usize| (p as u128).checked_pow(e as u32).ok_or_else(overflow);
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..j {
        let pi = pw(i)?;
        num = num
            .checked_mul(pw(n)? - pi)
            .and_then(|v| v.checked_mul(pw(k).ok()? - pi))
            .ok_or_else(overflow)?;
        den = den.checked_mul(pw(j)? - pi).ok_or_else(overflow)?;
    }
    debug_assert_eq!(num % den, 0);
    Ok(num / den)
}

/// `ln Pr(rank(U') = j)` for `U'` uniform on `F_p^{n×k}`.
pub fn ln_rank_probability(n: usize, k: usize, p: u64, j: usize) -> Result<f64> {
    check_dims(n, k, j)?;
    let lp = (p as f64).ln();
    let ln1m = |e: f64| (-(e * lp).exp()).ln_1p();
    let mut s = -(((n - j) * (k - j)) as f64) * lp;
    for i in 0..j {
        let i = i as f64;
        s += ln1m(i - n as f64) + ln1m(i - k as f64) - ln1m(i - j as f64);
    }
    Ok(s)
}

/// `Pr(rank(U') = j)`.
pub fn rank_distribution(n: usize, k: usize, p: u64, j: usize) -> Result<f64> {
    Ok(ln_rank_probability(n, k, p, j)?.exp())
}

fn ln_rank_probabilities(n: usize, k: usize, p: u64) -> Vec<f64> {
    (0..=k.min(n))
        .map(|j| ln_rank_probability(n, k, p, j).expect("j in range"))
        .collect()
}

/// `ξ_p = Σ_j p^{-j} Pr(rank(U') = j)`, the probability that `U'u = 0`.
pub fn xi_zero_uniform(n: usize, k: usize, p: u64) -> f64 {
    let lp = (p as f64).ln();
    let terms: Vec<f64> = ln_rank_probabilities(n, k, p)
        .into_iter()
        .enumerate()
        .map(|(j, l)| l - j as f64 * lp)
        .collect();
    log_sum_exp(&terms).exp()
}

/// `ln(1 - ξ_p)`, evaluated without cancellation as `Σ_j (1 - p^{-j}) Pr(rank = j)`.
pub fn ln_one_minus_xi_uniform(n: usize, k: usize, p: u64) -> f64 {
    let lp = (p as f64).ln();
    let terms: Vec<f64> = ln_rank_probabilities(n, k, p)
        .into_iter()
        .enumerate()
        .skip(1)
        .map(|(j, l)| l + (-(-(j as f64) * lp).exp_m1()).ln())
        .collect();
    log_sum_exp(&terms)
}

/// `ξ_p` as an exact rational, from the integer rank counts.
pub fn xi_zero_uniform_exact(n: usize, k: usize, p: u64) -> Result<Ratio<i128>> {
    let overflow = || invalid("exact rank law overflows i128");
    let pw = |e: usize| (p as i128).checked_pow(e as u32).ok_or_else(overflow);
    let mut num: i128 = 0;
    for j in 0..=k.min(n) {
        let c = i128::try_from(rank_count(n, k, p, j)?).map_err(|_| overflow())?;
        num = num
            .checked_add(c.checked_mul(pw(k - j)?).ok_or_else(overflow)?)
            .ok_or_else(overflow)?;
    }
    Ok(Ratio::new(num, pw(n * k + k)?))
}

/// `Pr(rank(U') = k) = ∏_{i<k} (1 - p^{i-n})`.
pub fn full_rank_mass(n: usize, k: usize, p: u64) -> Result<f64> {
    Ok(ln_full_rank_mass(n, k, p)?.exp())
}

fn ln_full_rank_mass(n: usize, k: usize, p: u64) -> Result<f64> {
    if k > n {
        return Err(Error::OutOfRange(k as f64));
    }
    ln_rank_probability(n, k, p, k)
}

/// Whether `Pr(rank(U') = k) > 1 - p^{k-n}`, compared through the complements
/// so that the test stays meaningful when both sides round to 1.
pub fn full_rank_bound_holds(n: usize, k: usize, p: u64) -> Result<bool> {
    let lp = (p as f64).ln();
    let ln_bound = (k as f64 - n as f64) * lp;
    // Deficiency 1 - ∏(1 - x_i) with x_i = p^{i-n}; it lies in [Σx - (Σx)²/2, Σx].
    let ln_x: Vec<f64> = (0..k).map(|i| (i as f64 - n as f64) * lp).collect();
    let ln_sum = log_sum_exp(&ln_x);
    let ln_deficiency = if ln_sum > -30.0 {
        (-ln_full_rank_mass(n, k, p)?.exp_m1()).ln()
    } else {
        ln_sum
    };
    Ok(ln_deficiency < ln_bound)
}
