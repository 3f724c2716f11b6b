use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::bisect;

/// Sphere-packing function `E_sp(x) = 1_{[1,∞)}(x) (x - 1 - ln x)/2`.
pub fn e_sp(x: f64) -> f64 {
    if x >= 1.0 {
        0.5 * (x - 1.0 - x.ln())
    } else {
        0.0
    }
}

/// Unexpurgated Poltyrev exponent: `E_sp(b)` on `[1, 2)`, `(1/2) ln(eb/4)` beyond.
pub fn e_p_un(b: f64) -> Result<f64> {
    if !(b >= 1.0) {
        return Err(Error::OutOfRange(b));
    }
    if b < 2.0 {
        Ok(e_sp(b))
    } else {
        Ok(0.5 * (1.0 + (b / 4.0).ln()))
    }
}

/// `E_T(b) = E_sp^{-1}(E_P^un(b))` on `[1, ∞)`; the identity on `[1, 2]`.
pub fn e_t(b: f64) -> Result<f64> {
    let target = e_p_un(b)?;
    if b <= 2.0 {
        return Ok(b);
    }
    Ok(bisect(|x| e_sp(x) - target, 1.0, b, 0.0))
}

/// `ln` of the radial tail bound `Pr(‖W‖ > r) ≤ exp(-n E_sp(r²/(nσ²)))`.
pub fn ln_chernoff_tail(n: usize, sigma: f64, r: f64) -> f64 {
    let nf = n as f64;
    -nf * e_sp(r * r / (nf * sigma * sigma))
}

pub fn chernoff_tail(n: usize, sigma: f64, r: f64) -> f64 {
    ln_chernoff_tail(n, sigma, r).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExponentFn {
    #[serde(rename = "E_sp")]
    SpherePacking,
    #[serde(rename = "E_P_un")]
    Poltyrev,
    #[serde(rename = "E_T")]
    Threshold,
}

impl ExponentFn {
    pub fn eval(self, x: f64) -> Result<f64> {
        match self {
            ExponentFn::SpherePacking => Ok(e_sp(x)),
            ExponentFn::Poltyrev => e_p_un(x),
            ExponentFn::Threshold => e_t(x),
        }
    }
}

/// One exponent function sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentCurve {
    pub function: ExponentFn,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl ExponentCurve {
    pub fn evaluate(function: ExponentFn, grid: &[f64]) -> Result<Self> {
        let values = grid
            .iter()
            .map(|&x| function.eval(x))
            .collect::<Result<_>>()?;
        Ok(Self {
            function,
            grid: grid.to_vec(),
            values,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e_sp_examples() {
        assert_eq!(e_sp(1.0), 0.0);
        assert_eq!(e_sp(0.5), 0.0);
        assert!((e_sp(2.0) - 0.153_426_409_720_027_35).abs() < 1e-15);
    }

    #[test]
    fn e_p_un_examples() {
        assert_eq!(e_p_un(1.0).unwrap(), 0.0);
        assert_eq!(e_p_un(4.0).unwrap(), 0.5);
        let left = e_sp(2.0 - 1e-13);
        assert!((left - e_p_un(2.0).unwrap()).abs() < 1e-12);
        assert!((e_p_un(2.0).unwrap() - e_sp(2.0)).abs() < 1e-15);
        assert!(e_p_un(0.9).is_err());
    }

    #[test]
    fn e_t_examples() {
        assert_eq!(e_t(1.5).unwrap(), 1.5);
        let v = e_t(4.0).unwrap();
        assert!((v - 3.146_193_220_620_582_6).abs() < 1e-12);
        assert!((e_sp(v) - 0.5).abs() < 1e-14);
        assert!(e_t(0.5).is_err());
    }

    #[test]
    fn e_t_inverts_on_grid() {
        for i in 0..=900 {
            let b = 1.0 + i as f64 * 0.01;
            let t = e_t(b).unwrap();
            assert!(t <= b);
            assert!(t >= 1.0);
            assert!((e_sp(t) - e_p_un(b).unwrap()).abs() < 1e-10, "b = {b}");
        }
    }

    #[test]
    fn capacity_dominates_poltyrev() {
        for i in 1..=1000 {
            let b = i as f64 * 0.01;
            assert!(0.5 * (1.0 + b).ln() > e_p_un(1.0 + b).unwrap());
        }
    }

    #[test]
    fn chernoff_examples() {
        assert_eq!(chernoff_tail(10, 1.0, 10f64.sqrt()), 1.0);
        assert!((chernoff_tail(10, 1.0, 20f64.sqrt()) - 0.215_614_303_970_734_95).abs() < 1e-13);
    }

    #[test]
    fn curve_evaluation() {
        let c = ExponentCurve::evaluate(ExponentFn::Poltyrev, &[1.0, 4.0]).unwrap();
        assert_eq!(c.values, vec![0.0, 0.5]);
        assert!(ExponentCurve::evaluate(ExponentFn::Threshold, &[0.0]).is_err());
    }
}
