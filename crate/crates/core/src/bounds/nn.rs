use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{compensated_sum, golden_section};
use crate::params::ParameterQuadruple;
use crate::theta::{e_p_un, e_sp, ln_chernoff_tail};

/// `√(πe/2)`.
fn c_half() -> f64 {
    (PI * E / 2.0).sqrt()
}

/// `ln` of the bound `(2/√(πn)) (ρ√(2πe)/(√n V^{1/n}) + √(πe/2)/p^{1-k/n})^n`
/// on the expected number of non-trivial lattice points in a ball of radius `ρ`.
pub fn ln_h_upper(q: &ParameterQuadruple, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(invalid(format!("radius rho = {rho} must be positive")));
    }
    let nf = q.n() as f64;
    let v_1n = (q.log_volume() / nf).exp();
    let inner = rho * (2.0 * PI * E).sqrt() / (nf.sqrt() * v_1n) + c_half() / q.prime_ratio();
    Ok((2.0 / (PI * nf).sqrt()).ln() + nf * inner.ln())
}

pub fn h_upper(q: &ParameterQuadruple, rho: f64) -> Result<f64> {
    Ok(ln_h_upper(q, rho)?.exp())
}

fn check_sigma_eps(sigma_w: f64, epsilon: f64) -> Result<()> {
    if !(sigma_w > 0.0) {
        return Err(invalid(format!("sigma_w = {sigma_w} must be positive")));
    }
    if !(epsilon > 0.0) {
        return Err(invalid(format!("epsilon = {epsilon} must be positive")));
    }
    Ok(())
}

/// `v^NN(u, ε)` for block length `n` and `r = p^{1-k/n}`.
pub(crate) fn v_nn_raw(n: usize, ratio: f64, sigma_w: f64, u: f64, epsilon: f64) -> f64 {
    let nf = n as f64;
    let s2 = nf * sigma_w * sigma_w;
    e_sp(u * u / s2) - (nf - 1.0) / nf * (u / (s2 * (1.0 + epsilon)).sqrt() + c_half() / ratio).ln()
}

/// `v^NN(u, ε) = E_sp(u²/(nσ²)) - ((n-1)/n) ln(u/√(nσ²(1+ε)) + √(πe/2)/p^{1-k/n})`.
pub fn v_nn(q: &ParameterQuadruple, sigma_w: f64, u: f64, epsilon: f64) -> Result<f64> {
    check_sigma_eps(sigma_w, epsilon)?;
    if !(u > 0.0) {
        return Err(invalid(format!("radius u = {u} must be positive")));
    }
    Ok(v_nn_raw(q.n(), q.prime_ratio(), sigma_w, u, epsilon))
}

/// Minimiser of `v^NN` over `[√(nσ²), √(nσ²(1+ε))]`, where it is convex.
pub(crate) fn inf_v_nn_raw(n: usize, ratio: f64, sigma_w: f64, epsilon: f64) -> (f64, f64) {
    let s2 = n as f64 * sigma_w * sigma_w;
    let (lo, hi) = (s2.sqrt(), (s2 * (1.0 + epsilon)).sqrt());
    let f = |u: f64| v_nn_raw(n, ratio, sigma_w, u, epsilon);
    let (mut best_u, mut best) = golden_section(f, lo, hi, 1e-10 * (hi - lo));
    for u in [lo, hi] {
        let v = f(u);
        if v <= best {
            best = v;
            best_u = u;
        }
    }
    (best_u, best)
}

/// `(u*, inf_{u∈C} v^NN(u, ε))`.
pub fn inf_v_nn(q: &ParameterQuadruple, sigma_w: f64, epsilon: f64) -> Result<(f64, f64)> {
    check_sigma_eps(sigma_w, epsilon)?;
    Ok(inf_v_nn_raw(q.n(), q.prime_ratio(), sigma_w, epsilon))
}

pub(crate) fn ip_upper_raw(n: usize, ratio: f64, inf_v: f64, epsilon: f64) -> f64 {
    let nf = n as f64;
    let r = c_half() / ratio;
    compensated_sum([
        (nf * r.ln()).exp(),
        (nf.ln() + nf * (1.0 / (1.0 + epsilon).sqrt() + r).ln()).exp(),
        (nf.ln() - nf * inf_v).exp(),
    ])
}

/// `(√(πe/2)/p^{1-k/n})^n + n((1/√(1+ε) + √(πe/2)/p^{1-k/n})^n + e^{-n inf v^NN})`.
pub fn ip_upper(q: &ParameterQuadruple, sigma_w: f64, epsilon: f64) -> Result<f64> {
    let (_, v) = inf_v_nn(q, sigma_w, epsilon)?;
    Ok(ip_upper_raw(q.n(), q.prime_ratio(), v, epsilon))
}

/// Terms of the nearest-neighbour decoding bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NNBoundReport {
    pub epsilon: f64,
    /// Chernoff bound on `Pr(‖W‖ > ap/2)`.
    pub chernoff_term: f64,
    pub ip_bound: f64,
    pub u_star: f64,
    pub inf_v: f64,
    pub total: f64,
    /// `-ln(total)/n`.
    pub exponent: f64,
}

impl NNBoundReport {
    /// True when the bound carries no information.
    pub fn is_vacuous(&self) -> bool {
        self.total >= 1.0
    }
}

/// Upper bound on the ensemble-average probability of a decoding error, with
/// `ε = V^{2/n}/(2πeσ_w²) - 1` taken from the quadruple.
pub fn b_nn_upper(q: &ParameterQuadruple, sigma_w: f64) -> Result<NNBoundReport> {
    if !(sigma_w > 0.0) {
        return Err(invalid(format!("sigma_w = {sigma_w} must be positive")));
    }
    let epsilon = q.epsilon(sigma_w);
    if !(epsilon > 0.0) {
        return Err(Error::Precondition(format!(
            "quadruple gives epsilon = {epsilon}; the bound needs epsilon > 0"
        )));
    }
    let (u_star, inf_v) = inf_v_nn(q, sigma_w, epsilon)?;
    let ip_bound = ip_upper_raw(q.n(), q.prime_ratio(), inf_v, epsilon);
    let chernoff_term = ln_chernoff_tail(q.n(), sigma_w, q.a() * q.p() as f64 / 2.0).exp();
    let total = chernoff_term + ip_bound;
    Ok(NNBoundReport {
        epsilon,
        chernoff_term,
        ip_bound,
        u_star,
        inf_v,
        total,
        exponent: -total.ln() / q.n() as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VnnGapRow {
    pub n: usize,
    pub ratio: f64,
    pub u_star: f64,
    pub inf_v: f64,
    pub target: f64,
    pub gap: f64,
}

/// `|inf v^NN - E_P^un(1+b)|` along `(n, p^{1-k/n})` pairs (unit noise).
pub fn lemma_vnn_convergence(b: f64, schedule: &[(usize, f64)]) -> Result<Vec<VnnGapRow>> {
    if !(b > 0.0) {
        return Err(invalid(format!("b = {b} must be positive")));
    }
    let target = e_p_un(1.0 + b)?;
    schedule
        .iter()
        .map(|&(n, ratio)| {
            if n < 2 || !(ratio > 0.0) {
                return Err(invalid(format!(
                    "schedule point ({n}, {ratio}) is not admissible"
                )));
            }
            let (u_star, inf_v) = inf_v_nn_raw(n, ratio, 1.0, b);
            Ok(VnnGapRow {
                n,
                ratio,
                u_star,
                inf_v,
                target,
                gap: (inf_v - target).abs(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::solve_scale;

    fn q12(a: f64) -> ParameterQuadruple {
        ParameterQuadruple::new(12, 3, 23, a).unwrap()
    }

    fn a12() -> f64 {
        solve_scale(12, 3, 23, 1.0, 3.0).unwrap()
    }

    #[test]
    fn h_upper_examples() {
        let q = q12(0.7871);
        let tiny = h_upper(&q, 1e-300).unwrap();
        let limit = 2.0 / (PI * 12.0).sqrt() * (c_half() / q.prime_ratio()).powi(12);
        assert!(crate::numeric::rel_diff(tiny, limit) < 1e-12);
        assert!(h_upper(&q, 12f64.sqrt()).unwrap().is_finite());
        let q2 = ParameterQuadruple::new(12, 3, 47, 0.7871).unwrap();
        assert!(h_upper(&q2, 2.0).unwrap() < h_upper(&q, 2.0).unwrap());
        assert!(h_upper(&q, 0.0).is_err());
    }

    #[test]
    fn v_nn_examples() {
        // limit p^{1-k/n} → ∞ at the right endpoint
        let n = 12;
        let u = (n as f64 * 4.0).sqrt();
        let v = v_nn_raw(n, 1e6, 1.0, u, 3.0);
        assert!((v - e_sp(4.0)).abs() < 1e-5);

        let q = q12(a12());
        let u = 24f64.sqrt();
        let v = v_nn(&q, 1.0, u, 3.0).unwrap();
        let r = (PI * E / 2.0).sqrt() / 23f64.powf(0.75);
        let expect = (2.0 - 1.0 - 2f64.ln()) / 2.0 - 11.0 / 12.0 * (0.5f64.sqrt() + r).ln();
        assert!((v - expect).abs() < 1e-14);
        assert!((v - 0.246_089).abs() < 1e-6);

        for i in 1..40 {
            let u = 12f64.sqrt() + i as f64 * 0.03;
            let h = 1e-3;
            let d2 = v_nn(&q, 1.0, u + h, 3.0).unwrap() - 2.0 * v_nn(&q, 1.0, u, 3.0).unwrap()
                + v_nn(&q, 1.0, u - h, 3.0).unwrap();
            assert!(d2 > 0.0);
        }
    }

    #[test]
    fn inf_v_nn_examples() {
        let q = q12(a12());
        let (u, v) = inf_v_nn(&q, 1.0, 3.0).unwrap();
        assert!((u - 4.5224).abs() < 1e-4);
        assert!((v - 0.235_096).abs() < 1e-6);
        let lo = v_nn(&q, 1.0, 12f64.sqrt(), 3.0).unwrap();
        let hi = v_nn(&q, 1.0, 48f64.sqrt(), 3.0).unwrap();
        assert!(v <= lo && v <= hi);

        // b < 1: the minimum sits at the right endpoint
        let (u, _) = inf_v_nn_raw(1000, 1e3, 1.0, 0.5);
        assert!((u - (1000.0f64 * 1.5).sqrt()).abs() < 1e-9);

        let (_, v) = inf_v_nn_raw(10_000, 1e4, 1.0, 1.0);
        assert!((v - e_p_un(2.0).unwrap()).abs() < 0.02);
    }

    #[test]
    fn ip_upper_examples() {
        let q = q12(a12());
        let v = ip_upper(&q, 1.0, 3.0).unwrap();
        let (_, iv) = inf_v_nn(&q, 1.0, 3.0).unwrap();
        let r = c_half() / q.prime_ratio();
        let direct = r.powi(12) + 12.0 * ((0.5 + r).powi(12) + (-12.0 * iv).exp());
        assert!((v - direct).abs() < 1e-14);
        assert!((v - 0.871_52).abs() < 1e-4);
        // ratio → ∞ limiting form
        let lim = ip_upper_raw(12, 1e12, iv, 3.0);
        assert!((lim - 12.0 * (0.5f64.powi(12) + (-12.0 * iv).exp())).abs() < 1e-9);
    }

    #[test]
    fn b_nn_upper_examples() {
        let q = q12(a12());
        let r = b_nn_upper(&q, 1.0).unwrap();
        assert!((r.epsilon - 3.0).abs() < 1e-12);
        let ap2 = (q.a() * 23.0 / 2.0).powi(2);
        assert!((r.chernoff_term.ln() + 12.0 * e_sp(ap2 / 12.0)).abs() < 1e-9);
        assert!(r.chernoff_term < 1e-10);
        assert_eq!(r.total, r.chernoff_term + r.ip_bound);
        assert!((r.total - 0.871_52).abs() < 1e-4);
        assert!(!r.is_vacuous());

        let r2 = b_nn_upper(&q.with_scale(2.0 * q.a()).unwrap(), 1.0).unwrap();
        assert!(r2.total < r.total);

        let low = q.with_scale(0.3).unwrap();
        assert!(b_nn_upper(&low, 1.0).is_err());
    }

    #[test]
    fn b_nn_upper_nonincreasing_in_p() {
        let mut prev = f64::INFINITY;
        for &p in &[23u64, 29, 31, 37, 41, 101, 1009] {
            let a = solve_scale(12, 3, p, 1.0, 3.0).unwrap();
            let q = ParameterQuadruple::new(12, 3, p, a).unwrap();
            let t = b_nn_upper(&q, 1.0).unwrap().total;
            assert!(t <= prev * (1.0 + 1e-12));
            prev = t;
        }
    }

    #[test]
    fn vnn_convergence_table() {
        let sched: Vec<(usize, f64)> = [100usize, 1000, 10_000]
            .iter()
            .map(|&n| (n, n as f64))
            .collect();
        for &(b, last) in &[(0.5, 0.000_206_6), (1.0, 0.000_206_6), (4.0, 0.000_372_5)] {
            let rows = lemma_vnn_convergence(b, &sched).unwrap();
            assert!(rows.windows(2).all(|w| w[1].gap < w[0].gap));
            assert!(rows[2].gap < 0.02);
            assert!(
                (rows[2].gap - last).abs() < 1e-6,
                "b = {b}: {}",
                rows[2].gap
            );
        }
        let rows = lemma_vnn_convergence(4.0, &sched).unwrap();
        assert!((rows[0].target - 0.611_571_775_657_104_9).abs() < 1e-15);
    }
}
