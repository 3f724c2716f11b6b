use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use super::count::ball_point_count_bound;
use super::ConstructionALattice;
use crate::error::{invalid, Error, Result};
use crate::numeric::{compensated_sum, log_sum_exp};
use crate::params::lg_sigma_w;

/// Default bound on the probability mass left outside a Gaussian table.
pub const DEFAULT_GAUSSIAN_TOL: f64 = 1e-12;

const GROWTH: f64 = 1.5;

/// `D_{Λ,σ_s,c}` restricted to the lattice points within `radius` of `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteGaussianTable {
    pub n: usize,
    pub sigma_s: f64,
    pub center: Vec<f64>,
    pub radius: f64,
    /// Integer vectors `z` of the points `a·z`.
    pub integers: Vec<Vec<i64>>,
    pub points: Vec<Vec<f64>>,
    /// `‖λ - c‖²` per point.
    pub sq_dist: Vec<f64>,
    pub weights: Vec<f64>,
    /// `ln Σ_λ e^{-‖λ-c‖²/(2σ_s²)}` over the window.
    pub log_partition: f64,
    /// Certified bound on the normalised mass outside the window.
    pub truncated_mass_bound: f64,
}

/// Bound on `Σ_{‖λ-c‖ ≥ R} e^{-‖λ-c‖²/(2σ²)}` for points of `aZ^n ⊇ Λ`, summed
/// over shells of width `σ` with the point-count bound on each enclosing ball.
fn gaussian_tail_bound(n: usize, a: f64, sigma: f64, r: f64) -> f64 {
    let mut terms = Vec::new();
    let mut j = 0.0f64;
    loop {
        let inner = r + j * sigma;
        let ln_t = ball_point_count_bound(n, a, inner + sigma).ln()
            - inner * inner / (2.0 * sigma * sigma);
        let t = ln_t.exp();
        terms.push(t);
        // Past the peak of the radial profile the shell terms fall faster than geometrically.
        if inner > sigma * (n as f64).sqrt() + sigma && t < 1e-30 * terms[0].max(1e-300) {
            break;
        }
        if j > 1e6 {
            break;
        }
        j += 1.0;
    }
    compensated_sum(terms)
}

/// Enumerate `D_{Λ,σ_s,c}`, growing the window by 1.5× until the certified
/// outside mass drops below `tol`.
pub fn discrete_gaussian(
    lat: &ConstructionALattice,
    sigma_s: f64,
    c: &[f64],
    tol: f64,
) -> Result<DiscreteGaussianTable> {
    lat.check_dim(c)?;
    if !(sigma_s > 0.0 && sigma_s.is_finite()) {
        return Err(invalid(format!("sigma_s = {sigma_s} must be positive")));
    }
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance {tol} must be positive")));
    }
    let n = lat.dim();
    let s2 = sigma_s * sigma_s;
    let mut radius = sigma_s * (n as f64).sqrt() + lat.scale() * lat.modulus() as f64;
    loop {
        let mut integers = Vec::new();
        let mut sq_dist = Vec::new();
        lat.visit_ball(c, radius, |z, d2| {
            integers.push(z.to_vec());
            sq_dist.push(d2);
        })?;
        let exps: Vec<f64> = sq_dist.iter().map(|d| -d / (2.0 * s2)).collect();
        let log_partition = log_sum_exp(&exps);
        let tail = gaussian_tail_bound(n, lat.scale(), sigma_s, radius);
        let bound = if log_partition.is_finite() {
            tail / log_partition.exp()
        } else {
            f64::INFINITY
        };
        if bound < tol {
            let weights = exps.iter().map(|e| (e - log_partition).exp()).collect();
            let points = integers.iter().map(|z| lat.point(z)).collect();
            return Ok(DiscreteGaussianTable {
                n,
                sigma_s,
                center: c.to_vec(),
                radius,
                integers,
                points,
                sq_dist,
                weights,
                log_partition,
                truncated_mass_bound: bound,
            });
        }
        radius *= GROWTH;
    }
}

/// `P = (1/n) E‖X - c‖²`.
pub fn signal_power(tbl: &DiscreteGaussianTable) -> f64 {
    compensated_sum(tbl.weights.iter().zip(&tbl.sq_dist).map(|(w, d)| w * d)) / tbl.n as f64
}

/// Entropy in nats: `(direct, via_formula)` where direct is `-Σ w ln w` and the
/// formula is `ln((2πσ_s²)^{n/2} f_{σ_s,c}(Λ)) + (n/2) P/σ_s²`.
pub fn entropy_lattice_gaussian(tbl: &DiscreteGaussianTable) -> (f64, f64) {
    let direct = -compensated_sum(
        tbl.weights
            .iter()
            .filter(|&&w| w > 0.0)
            .map(|&w| w * w.ln()),
    );
    let p = signal_power(tbl);
    let via = tbl.log_partition + tbl.n as f64 / 2.0 * p / (tbl.sigma_s * tbl.sigma_s);
    (direct, via)
}

/// Lower bound (nats per dimension) on the rate of lattice Gaussian coding:
/// `½ ln((1-ε_Λ(σ_s))^{2/n} / ((1+ε) e^{1-P/σ_s²})) + ½ ln(1 + σ_s²/σ_z²)`,
/// with `1 + ε = V^{2/n}/(2πeσ_w²)` and `σ_w = σ̃σ_z/σ_s`.
pub fn rate_lower_bound(
    lat: &ConstructionALattice,
    sigma_s: f64,
    sigma_z: f64,
    flatness_at_sigma_s: f64,
    power: f64,
) -> Result<f64> {
    if !(sigma_s > 0.0 && sigma_z > 0.0) {
        return Err(invalid("sigma_s and sigma_z must be positive"));
    }
    if !(flatness_at_sigma_s < 1.0) {
        return Err(Error::VacuousFlatness(flatness_at_sigma_s));
    }
    let nf = lat.dim() as f64;
    let sw = lg_sigma_w(sigma_s, sigma_z);
    let ln_one_plus_eps = 2.0 / nf * lat.log_volume() - (2.0 * PI * E * sw * sw).ln();
    let s2 = sigma_s * sigma_s;
    Ok(
        0.5 * (2.0 / nf * (-flatness_at_sigma_s).ln_1p() - ln_one_plus_eps - (1.0 - power / s2))
            + 0.5 * (s2 / (sigma_z * sigma_z)).ln_1p(),
    )
}
