//! Construction-A lattices `a(C(M) + pZ^n)`: decoding, point enumeration and
//! discrete Gaussian tables.
//!
//! Points are handled as integer vectors `z` with the lattice point `a·z`; all
//! geometry is evaluated on `a * (z as f64)` so that every lattice sharing the
//! scale `a` sees identical coordinates.

mod count;
mod decode;
mod gaussian;

pub use count::{ball_point_count_bound, Exclude, MAX_ENUMERATED_POINTS};
pub use gaussian::{
    discrete_gaussian, entropy_lattice_gaussian, rate_lower_bound, signal_power,
    DiscreteGaussianTable, DEFAULT_GAUSSIAN_TOL,
};

use std::collections::HashSet;

use crate::error::{invalid, Error, Result};
use crate::gf::{GeneratorMatrix, DEFAULT_ENUMERATION_CAP};
use crate::params::ParameterQuadruple;
use crate::theta::{coset_theta, flatness_factor_ln, ThetaValue};

#[derive(Debug, Clone)]
pub struct ConstructionALattice {
    n: usize,
    a: f64,
    modulus: u64,
    quad: Option<ParameterQuadruple>,
    matrix: Option<GeneratorMatrix>,
    /// Distinct codewords, flattened, ordered by first message index.
    cosets: Vec<u64>,
    first_message: Vec<usize>,
}

impl ConstructionALattice {
    /// `aΛ(M)` for the quadruple `q = (n, k, p, a)`.
    pub fn new(q: ParameterQuadruple, m: GeneratorMatrix) -> Result<Self> {
        if (m.p(), m.rows(), m.cols()) != (q.p(), q.n(), q.k()) {
            return Err(invalid(format!(
                "matrix is {}x{} over F_{}, quadruple needs {}x{} over F_{}",
                m.rows(),
                m.cols(),
                m.p(),
                q.n(),
                q.k(),
                q.p()
            )));
        }
        let list = m.enumerate_codewords_capped(DEFAULT_ENUMERATION_CAP)?;
        let mut seen = HashSet::new();
        let mut cosets = Vec::new();
        let mut first_message = Vec::new();
        for (idx, c) in list.iter().enumerate() {
            if seen.insert(c) {
                cosets.extend_from_slice(c);
                first_message.push(idx);
            }
        }
        Ok(Self {
            n: q.n(),
            a: q.a(),
            modulus: q.p(),
            quad: Some(q),
            matrix: Some(m),
            cosets,
            first_message,
        })
    }

    /// The scaled integer lattice `aZ^n` (a single coset, modulus 1).
    pub fn scaled_integers(n: usize, a: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("dimension must be positive"));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(invalid(format!("scale a = {a} must be positive")));
        }
        Ok(Self {
            n,
            a,
            modulus: 1,
            quad: None,
            matrix: None,
            cosets: vec![0; n],
            first_message: vec![0],
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn scale(&self) -> f64 {
        self.a
    }

    /// `p` for construction-A lattices, 1 for `aZ^n`.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn quadruple(&self) -> Option<&ParameterQuadruple> {
        self.quad.as_ref()
    }

    pub fn matrix(&self) -> Option<&GeneratorMatrix> {
        self.matrix.as_ref()
    }

    pub fn num_cosets(&self) -> usize {
        self.first_message.len()
    }

    pub fn coset(&self, i: usize) -> &[u64] {
        &self.cosets[i * self.n..(i + 1) * self.n]
    }

    pub fn cosets(&self) -> std::slice::ChunksExact<'_, u64> {
        self.cosets.chunks_exact(self.n)
    }

    /// Message index at which coset `i` first appears.
    pub fn first_message(&self, i: usize) -> usize {
        self.first_message[i]
    }

    /// `ln` of the fundamental volume `a^n m^n / |C(M)|`.
    pub fn log_volume(&self) -> f64 {
        let nf = self.n as f64;
        nf * self.a.ln() + nf * (self.modulus as f64).ln() - (self.num_cosets() as f64).ln()
    }

    pub fn volume(&self) -> f64 {
        self.log_volume().exp()
    }

    /// Whether the integer vector `z` (point `a·z`) lies in the lattice.
    pub fn contains_integer(&self, z: &[i64]) -> bool {
        if z.len() != self.n {
            return false;
        }
        let m = self.modulus as i64;
        let r: Vec<u64> = z.iter().map(|&v| v.rem_euclid(m) as u64).collect();
        self.cosets().any(|c| c == r.as_slice())
    }

    /// Whether the real point `λ` lies in the lattice: `λ/a` integral with
    /// residue in the code.
    pub fn contains(&self, lambda: &[f64]) -> bool {
        if lambda.len() != self.n {
            return false;
        }
        let mut z = Vec::with_capacity(self.n);
        for &x in lambda {
            let t = x / self.a;
            let r = t.round();
            if (t - r).abs() > 1e-9 * (1.0 + t.abs()) {
                return false;
            }
            z.push(r as i64);
        }
        self.contains_integer(&z)
    }

    pub fn point(&self, z: &[i64]) -> Vec<f64> {
        z.iter().map(|&v| self.a * v as f64).collect()
    }

    /// `Θ_{aΛ}(τ)` by coset decomposition.
    pub fn theta(&self, tau: f64) -> Result<ThetaValue> {
        coset_theta(self.cosets(), self.modulus, self.a, tau)
    }

    /// Flatness factor `ε_Λ(σ)`.
    pub fn flatness_factor(&self, sigma: f64) -> Result<f64> {
        if !(sigma > 0.0) {
            return Err(invalid(format!("sigma = {sigma} must be positive")));
        }
        let tau = 1.0 / (2.0 * std::f64::consts::PI * sigma * sigma);
        flatness_factor_ln(self.log_volume(), self.n, self.theta(tau)?, sigma)
    }

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.n {
            return Err(Error::ShapeMismatch {
                expected: self.n,
                found: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(invalid("vector has non-finite coordinates"));
        }
        Ok(())
    }
}
