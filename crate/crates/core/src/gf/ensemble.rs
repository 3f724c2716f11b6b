use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::{all_matrices, checked_power, GeneratorMatrix, DEFAULT_ENUMERATION_CAP};
use super::pochhammer::{ln_one_minus_xi_uniform, xi_zero_uniform};
use crate::error::{invalid, Error, Result};
use crate::params::ParameterQuadruple;

/// A finite distribution over generator matrices of a common shape.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitEnsemble {
    pairs: Vec<(GeneratorMatrix, f64)>,
}

impl ExplicitEnsemble {
    pub fn new(pairs: Vec<(GeneratorMatrix, f64)>) -> Result<Self> {
        let Some((first, _)) = pairs.first() else {
            return Err(invalid("explicit ensemble needs at least one matrix"));
        };
        let shape = (first.p(), first.rows(), first.cols());
        if pairs
            .iter()
            .any(|(m, _)| (m.p(), m.rows(), m.cols()) != shape)
        {
            return Err(invalid("explicit ensemble mixes matrix shapes"));
        }
        if pairs.iter().any(|&(_, w)| !(w >= 0.0)) {
            return Err(invalid(
                "explicit ensemble probabilities must be nonnegative",
            ));
        }
        let total: f64 = pairs.iter().map(|&(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!(
                "explicit ensemble probabilities sum to {total}"
            )));
        }
        Ok(Self { pairs })
    }

    pub fn point_mass(m: GeneratorMatrix) -> Self {
        Self {
            pairs: vec![(m, 1.0)],
        }
    }

    pub fn pairs(&self) -> &[(GeneratorMatrix, f64)] {
        &self.pairs
    }

    fn shape(&self) -> (u64, usize, usize) {
        let m = &self.pairs[0].0;
        (m.p(), m.rows(), m.cols())
    }
}

/// Which random-matrix distribution generates the lattice.
#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleSpec {
    /// Uniform over all of `F_p^{n×k}`.
    AllMatrices,
    /// Uniform over the full-rank matrices.
    FullRankOnly,
    Explicit(ExplicitEnsemble),
}

impl EnsembleSpec {
    fn check_shape(&self, q: &ParameterQuadruple) -> Result<()> {
        if let EnsembleSpec::Explicit(e) = self {
            let (p, n, k) = e.shape();
            if (p, n, k) != (q.p(), q.n(), q.k()) {
                return Err(invalid(format!(
                    "explicit ensemble has shape ({n}, {k}) over F_{p}, quadruple needs ({}, {}) over F_{}",
                    q.n(),
                    q.k(),
                    q.p()
                )));
            }
        }
        Ok(())
    }

    /// The support with probabilities, enumerated exhaustively.
    ///
    /// For the uniform ensembles this walks all `p^{nk}` matrices, so `cap`
    /// bounds `p^{nk}`.
    pub fn support(&self, q: &ParameterQuadruple, cap: u64) -> Result<Vec<(GeneratorMatrix, f64)>> {
        self.check_shape(q)?;
        let (n, k, p) = (q.n(), q.k(), q.p());
        match self {
            EnsembleSpec::Explicit(e) => Ok(e.pairs.clone()),
            EnsembleSpec::AllMatrices => {
                let all: Vec<_> = all_matrices(n, k, p, cap)?.collect();
                let w = 1.0 / all.len() as f64;
                Ok(all.into_iter().map(|m| (m, w)).collect())
            }
            EnsembleSpec::FullRankOnly => {
                let full: Vec<_> = all_matrices(n, k, p, cap)?
                    .filter(|m| m.rank() == k)
                    .collect();
                let w = 1.0 / full.len() as f64;
                Ok(full.into_iter().map(|m| (m, w)).collect())
            }
        }
    }
}

/// Draw one matrix from the ensemble.
///
/// Full-rank draws reject rank-deficient uniform matrices; the acceptance
/// probability exceeds `1 - p^{k-n}`.
pub fn sample_matrix<R: Rng + ?Sized>(
    ens: &EnsembleSpec,
    q: &ParameterQuadruple,
    rng: &mut R,
) -> Result<GeneratorMatrix> {
    ens.check_shape(q)?;
    let (n, k, p) = (q.n(), q.k(), q.p());
    let uniform = |rng: &mut R| {
        let e = (0..n * k).map(|_| rng.random_range(0..p)).collect();
        GeneratorMatrix::new(p, n, k, e)
    };
    match ens {
        EnsembleSpec::AllMatrices => uniform(rng),
        EnsembleSpec::FullRankOnly => loop {
            let m = uniform(rng)?;
            if m.rank() == k {
                return Ok(m);
            }
        },
        EnsembleSpec::Explicit(e) => {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for (m, w) in &e.pairs {
                acc += w;
                if u < acc {
                    return Ok(m.clone());
                }
            }
            let last = e
                .pairs
                .iter()
                .rev()
                .find(|(_, w)| *w > 0.0)
                .unwrap_or(&e.pairs[0]);
            Ok(last.0.clone())
        }
    }
}

/// Collision statistics of the random codeword `G u` with `u` uniform on `F_p^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiStats {
    /// `Pr(G u = 0)`.
    pub xi_zero: f64,
    /// `max_{y ≠ 0} Pr(G u = y)`.
    pub xi_max: f64,
    /// `ln ξ^max`, kept separately because `ξ^max` underflows at moderate `n`.
    pub ln_xi_max: f64,
}

impl XiStats {
    fn from_values(xi_zero: f64, xi_max: f64) -> Self {
        Self {
            xi_zero,
            xi_max,
            ln_xi_max: xi_max.ln(),
        }
    }
}

/// `ξ^(0)` and `ξ^max` for the ensemble.
///
/// Uniform matrices use the closed forms; explicit and full-rank ensembles are
/// enumerated exhaustively (the latter only when `p^{nk} ≤ cap`).
pub fn xi_stats(ens: &EnsembleSpec, q: &ParameterQuadruple) -> Result<XiStats> {
    xi_stats_capped(ens, q, DEFAULT_ENUMERATION_CAP)
}

pub fn xi_stats_capped(ens: &EnsembleSpec, q: &ParameterQuadruple, cap: u64) -> Result<XiStats> {
    let (n, k, p) = (q.n(), q.k(), q.p());
    match ens {
        EnsembleSpec::AllMatrices => {
            let xi_zero = xi_zero_uniform(n, k, p);
            let lp = (p as f64).ln();
            let ln_pn_minus_1 = n as f64 * lp + (-(-(n as f64) * lp).exp()).ln_1p();
            let ln_xi_max = ln_one_minus_xi_uniform(n, k, p) - ln_pn_minus_1;
            Ok(XiStats {
                xi_zero,
                xi_max: ln_xi_max.exp(),
                ln_xi_max,
            })
        }
        EnsembleSpec::FullRankOnly | EnsembleSpec::Explicit(_) => {
            let support = ens.support(q, cap)?;
            let per = checked_power(p, k, cap)?;
            if (support.len() as u64).saturating_mul(per) > cap {
                return Err(Error::EnumerationCap {
                    requested: support.len() as f64 * per as f64,
                    cap: cap as f64,
                });
            }
            let (z, m) = codeword_distribution_extremes(&support)?;
            Ok(XiStats::from_values(z, m))
        }
    }
}

/// `(Pr(Gu = 0), max_{y≠0} Pr(Gu = y))` by enumerating every codeword of every matrix.
fn codeword_distribution_extremes(support: &[(GeneratorMatrix, f64)]) -> Result<(f64, f64)> {
    let mut mass: HashMap<Vec<u64>, f64> = HashMap::new();
    for (m, w) in support {
        if *w == 0.0 {
            continue;
        }
        let cw = m.enumerate_codewords()?;
        let each = w / cw.len() as f64;
        for c in cw.iter() {
            *mass.entry(c.to_vec()).or_insert(0.0) += each;
        }
    }
    let mut zero = 0.0;
    let mut max = 0.0f64;
    for (y, v) in mass {
        if y.iter().all(|&c| c == 0) {
            zero = v;
        } else {
            max = max.max(v);
        }
    }
    Ok((zero, max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q212() -> ParameterQuadruple {
        ParameterQuadruple::new(2, 1, 2, 1.0).unwrap()
    }

    #[test]
    fn xi_stats_examples() {
        let s = xi_stats(&EnsembleSpec::AllMatrices, &q212()).unwrap();
        assert!((s.xi_zero - 0.625).abs() < 1e-15);
        assert!((s.xi_max - 0.125).abs() < 1e-15);

        let zero = GeneratorMatrix::zeros(2, 2, 1).unwrap();
        let e = EnsembleSpec::Explicit(ExplicitEnsemble::point_mass(zero));
        let s = xi_stats(&e, &q212()).unwrap();
        assert_eq!((s.xi_zero, s.xi_max), (1.0, 0.0));

        let d2 = GeneratorMatrix::from_rows(2, &[vec![1], vec![1]]).unwrap();
        let e = EnsembleSpec::Explicit(ExplicitEnsemble::point_mass(d2));
        let s = xi_stats(&e, &q212()).unwrap();
        assert_eq!((s.xi_zero, s.xi_max), (0.5, 0.5));
    }

    #[test]
    fn uniform_closed_forms_match_enumeration() {
        for &(n, k, p) in &[(2, 1, 2), (2, 1, 3), (3, 2, 2), (3, 1, 3)] {
            let q = ParameterQuadruple::new(n, k, p, 1.0).unwrap();
            let closed = xi_stats(&EnsembleSpec::AllMatrices, &q).unwrap();
            let support = EnsembleSpec::AllMatrices.support(&q, 1 << 20).unwrap();
            let (z, m) = codeword_distribution_extremes(&support).unwrap();
            assert!((closed.xi_zero - z).abs() < 1e-14);
            assert!((closed.xi_max - m).abs() < 1e-14);
            let pn = (p as f64).powi(n as i32);
            assert!((closed.xi_max * (pn - 1.0) + closed.xi_zero - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn full_rank_stats_follow_group_symmetry() {
        for &(n, k, p) in &[(2, 1, 2), (3, 2, 2), (2, 1, 3)] {
            let q = ParameterQuadruple::new(n, k, p, 1.0).unwrap();
            let s = xi_stats(&EnsembleSpec::FullRankOnly, &q).unwrap();
            let pk = (p as f64).powi(k as i32);
            let pn = (p as f64).powi(n as i32);
            assert!((s.xi_zero - 1.0 / pk).abs() < 1e-14);
            assert!((s.xi_max - (1.0 - 1.0 / pk) / (pn - 1.0)).abs() < 1e-14);
        }
        let big = ParameterQuadruple::new(12, 3, 23, 1.0).unwrap();
        assert!(matches!(
            xi_stats(&EnsembleSpec::FullRankOnly, &big),
            Err(Error::EnumerationCap { .. })
        ));
    }

    #[test]
    fn xi_max_stays_finite_in_log_space() {
        let q = ParameterQuadruple::new(400, 100, 5431, 1.0).unwrap();
        let s = xi_stats(&EnsembleSpec::AllMatrices, &q).unwrap();
        assert_eq!(s.xi_max, 0.0);
        assert!(s.ln_xi_max.is_finite());
        assert!((s.ln_xi_max + 400.0 * 5431f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn explicit_validation() {
        let m = GeneratorMatrix::zeros(2, 2, 1).unwrap();
        assert!(ExplicitEnsemble::new(vec![(m.clone(), 0.5)]).is_err());
        assert!(ExplicitEnsemble::new(vec![(m.clone(), -0.5), (m.clone(), 1.5)]).is_err());
        let other = GeneratorMatrix::zeros(3, 2, 1).unwrap();
        assert!(ExplicitEnsemble::new(vec![(m, 0.5), (other, 0.5)]).is_err());
        assert!(ExplicitEnsemble::new(vec![]).is_err());
    }

    #[test]
    fn sampling_frequencies() {
        let q = q212();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 100_000;
        let mut counts: HashMap<Vec<u64>, usize> = HashMap::new();
        for _ in 0..draws {
            let m = sample_matrix(&EnsembleSpec::AllMatrices, &q, &mut rng).unwrap();
            *counts.entry(m.entries().to_vec()).or_default() += 1;
        }
        assert_eq!(counts.len(), 4);
        for c in counts.values() {
            assert!((*c as f64 / draws as f64 - 0.25).abs() < 0.01);
        }

        let mut counts: HashMap<Vec<u64>, usize> = HashMap::new();
        for _ in 0..draws {
            let m = sample_matrix(&EnsembleSpec::FullRankOnly, &q, &mut rng).unwrap();
            *counts.entry(m.entries().to_vec()).or_default() += 1;
        }
        assert!(!counts.contains_key(&vec![0, 0]));
        assert_eq!(counts.len(), 3);
        for c in counts.values() {
            assert!((*c as f64 / draws as f64 - 1.0 / 3.0).abs() < 0.01);
        }

        let a = GeneratorMatrix::from_rows(2, &[vec![1], vec![0]]).unwrap();
        let b = GeneratorMatrix::from_rows(2, &[vec![1], vec![1]]).unwrap();
        let e = EnsembleSpec::Explicit(
            ExplicitEnsemble::new(vec![(a.clone(), 0.2), (b, 0.8)]).unwrap(),
        );
        let hits = (0..draws)
            .filter(|_| sample_matrix(&e, &q, &mut rng).unwrap() == a)
            .count();
        assert!((hits as f64 / draws as f64 - 0.2).abs() < 0.01);
    }
}
