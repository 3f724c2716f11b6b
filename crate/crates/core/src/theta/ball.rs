use std::f64::consts::{E, PI};

use statrs::function::gamma::ln_gamma;

/// `ln μ(B_n(0,1)) = (n/2) ln π - ln Γ(n/2 + 1)`.
pub fn ln_ball_volume(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    h * PI.ln() - ln_gamma(h + 1.0)
}

/// Volume of the unit ball in `R^n`.
pub fn ball_volume(n: usize) -> f64 {
    ln_ball_volume(n).exp()
}

/// `ln` of the upper bound `(1/√(nπ)) (2πe/n)^{n/2}` on the unit-ball volume.
pub fn ln_ball_volume_bound(n: usize) -> f64 {
    let nf = n as f64;
    -0.5 * (nf * PI).ln() + nf / 2.0 * (2.0 * PI * E / nf).ln()
}

pub fn ball_volume_bound(n: usize) -> f64 {
    ln_ball_volume_bound(n).exp()
}
