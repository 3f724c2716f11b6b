use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::params::is_prime;
use crate::params::prime::{mul_mod, pow_mod};

/// Default bound on `p^k` (and on exhaustive ensemble sizes).
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 22;

/// `base^exp` if it is at most `cap`.
pub(crate) fn checked_power(base: u64, exp: usize, cap: u64) -> Result<u64> {
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = match acc.checked_mul(base) {
            Some(v) if v <= cap => v,
            _ => {
                return Err(Error::EnumerationCap {
                    requested: (base as f64).powi(exp as i32),
                    cap: cap as f64,
                })
            }
        };
    }
    if acc > cap {
        return Err(Error::EnumerationCap {
            requested: acc as f64,
            cap: cap as f64,
        });
    }
    Ok(acc)
}

/// An `n × k` matrix over `F_p`, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorMatrix {
    p: u64,
    n: usize,
    k: usize,
    entries: Vec<u64>,
}

impl GeneratorMatrix {
    pub fn new(p: u64, n: usize, k: usize, entries: Vec<u64>) -> Result<Self> {
        if !is_prime(p) {
            return Err(invalid(format!("p = {p} is not prime")));
        }
        if n == 0 || k == 0 {
            return Err(invalid("matrix dimensions must be positive"));
        }
        if entries.len() != n * k {
            return Err(Error::ShapeMismatch {
                expected: n * k,
                found: entries.len(),
            });
        }
        if let Some(&e) = entries.iter().find(|&&e| e >= p) {
            return Err(invalid(format!("entry {e} is not reduced mod {p}")));
        }
        Ok(Self { p, n, k, entries })
    }

    /// Build from rows; every row must have the same length.
    pub fn from_rows(p: u64, rows: &[Vec<u64>]) -> Result<Self> {
        let n = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != k) {
            return Err(Error::ShapeMismatch {
                expected: k,
                found: r.len(),
            });
        }
        Self::new(p, n, k, rows.concat())
    }

    pub fn zeros(p: u64, n: usize, k: usize) -> Result<Self> {
        Self::new(p, n, k, vec![0; n * k])
    }

    /// `[I_k; 0]` (or its truncation when `n < k`).
    pub fn identity(p: u64, n: usize, k: usize) -> Result<Self> {
        let mut e = vec![0; n * k];
        for i in 0..n.min(k) {
            e[i * k + i] = 1;
        }
        Self::new(p, n, k, e)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.k + j]
    }

    /// `Mx mod p`.
    pub fn matvec(&self, x: &[u64]) -> Result<Vec<u64>> {
        if x.len() != self.k {
            return Err(Error::ShapeMismatch {
                expected: self.k,
                found: x.len(),
            });
        }
        let p = self.p as u128;
        Ok(self
            .entries
            .chunks_exact(self.k)
            .map(|row| {
                let s = row.iter().zip(x).fold(0u128, |acc, (&m, &xi)| {
                    (acc + m as u128 * (xi as u128 % p)) % p
                });
                s as u64
            })
            .collect())
    }

    /// Rank over `F_p` by Gaussian elimination.
    pub fn rank(&self) -> usize {
        let p = self.p;
        let (n, k) = (self.n, self.k);
        let mut a = self.entries.clone();
        let mut rank = 0;
        for col in 0..k {
            let Some(piv) = (rank..n).find(|&r| a[r * k + col] != 0) else {
                continue;
            };
            if piv != rank {
                for j in 0..k {
                    a.swap(piv * k + j, rank * k + j);
                }
            }
            let inv = pow_mod(a[rank * k + col], p - 2, p);
            for j in col..k {
                a[rank * k + j] = mul_mod(a[rank * k + j], inv, p);
            }
            for r in 0..n {
                let f = a[r * k + col];
                if r == rank || f == 0 {
                    continue;
                }
                for j in col..k {
                    let sub = mul_mod(f, a[rank * k + j], p);
                    a[r * k + j] = (a[r * k + j] + p - sub) % p;
                }
            }
            rank += 1;
            if rank == n {
                break;
            }
        }
        rank
    }

    /// All `p^k` codewords `Mx`, indexed by message `x` in lexicographic order
    /// (first coordinate most significant). Duplicates are kept.
    pub fn enumerate_codewords(&self) -> Result<CodewordList> {
        self.enumerate_codewords_capped(DEFAULT_ENUMERATION_CAP)
    }

    pub fn enumerate_codewords_capped(&self, cap: u64) -> Result<CodewordList> {
        let count = checked_power(self.p, self.k, cap)? as usize;
        let (n, k, p) = (self.n, self.k, self.p);
        let mut data = Vec::with_capacity(count * n);
        data.extend(std::iter::repeat_n(0u64, n));
        let mut len = 1usize;
        for j in 0..k {
            let mut next = Vec::with_capacity(len * p as usize * n);
            for m in 0..len {
                let base = &data[m * n..(m + 1) * n];
                for d in 0..p {
                    next.extend(
                        base.iter()
                            .enumerate()
                            .map(|(i, &b)| (b + mul_mod(d, self.entries[i * k + j], p)) % p),
                    );
                }
            }
            data = next;
            len *= p as usize;
        }
        Ok(CodewordList { n, data })
    }
}

/// Message-indexed list of codewords stored contiguously.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodewordList {
    n: usize,
    data: Vec<u64>,
}

impl CodewordList {
    pub fn len(&self) -> usize {
        self.data.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, m: usize) -> &[u64] {
        &self.data[m * self.n..(m + 1) * self.n]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, u64> {
        self.data.chunks_exact(self.n)
    }

    pub fn to_vecs(&self) -> Vec<Vec<u64>> {
        self.iter().map(<[u64]>::to_vec).collect()
    }
}

/// Every `n × k` matrix over `F_p`, in lexicographic order of the row-major entries.
pub fn all_matrices(
    n: usize,
    k: usize,
    p: u64,
    cap: u64,
) -> Result<impl Iterator<Item = GeneratorMatrix>> {
    let total = checked_power(p, n * k, cap)?;
    GeneratorMatrix::zeros(p, n, k)?;
    Ok((0..total).map(move |mut idx| {
        let mut e = vec![0u64; n * k];
        for slot in e.iter_mut().rev() {
            *slot = idx % p;
            idx /= p;
        }
        GeneratorMatrix {
            p,
            n,
            k,
            entries: e,
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn matvec_examples() {
        let z = GeneratorMatrix::zeros(5, 3, 2).unwrap();
        assert_eq!(z.matvec(&[3, 4]).unwrap(), vec![0, 0, 0]);
        let m = GeneratorMatrix::from_rows(2, &[vec![1], vec![1]]).unwrap();
        assert_eq!(m.matvec(&[1]).unwrap(), vec![1, 1]);
        let m = GeneratorMatrix::from_rows(3, &[vec![1, 2], vec![0, 1], vec![2, 2]]).unwrap();
        assert_eq!(m.matvec(&[1, 2]).unwrap(), vec![2, 2, 0]);
        assert!(matches!(m.matvec(&[1]), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(GeneratorMatrix::new(4, 1, 1, vec![0]).is_err());
        assert!(GeneratorMatrix::new(3, 1, 1, vec![3]).is_err());
        assert!(GeneratorMatrix::new(3, 2, 1, vec![0]).is_err());
        assert!(GeneratorMatrix::from_rows(3, &[vec![0], vec![0, 1]]).is_err());
    }

    #[test]
    fn rank_examples() {
        assert_eq!(GeneratorMatrix::identity(7, 5, 3).unwrap().rank(), 3);
        assert_eq!(GeneratorMatrix::identity(7, 2, 3).unwrap().rank(), 2);
        assert_eq!(GeneratorMatrix::zeros(7, 4, 3).unwrap().rank(), 0);
        let m = GeneratorMatrix::from_rows(2, &[vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(m.rank(), 1);
        let m = GeneratorMatrix::from_rows(3, &[vec![1, 2], vec![2, 1]]).unwrap();
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn codeword_enumeration_examples() {
        let m = GeneratorMatrix::from_rows(2, &[vec![1], vec![1]]).unwrap();
        assert_eq!(
            m.enumerate_codewords().unwrap().to_vecs(),
            vec![vec![0, 0], vec![1, 1]]
        );
        let z = GeneratorMatrix::zeros(3, 2, 2).unwrap();
        let cw = z.enumerate_codewords().unwrap();
        assert_eq!(cw.len(), 9);
        assert!(cw.iter().all(|c| c == [0, 0]));
        let id = GeneratorMatrix::identity(2, 2, 2).unwrap();
        assert_eq!(
            id.enumerate_codewords().unwrap().to_vecs(),
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
        assert!(matches!(
            GeneratorMatrix::zeros(23, 2, 12)
                .unwrap()
                .enumerate_codewords(),
            Err(Error::EnumerationCap { .. })
        ));
    }

    #[test]
    fn all_matrices_counts() {
        assert_eq!(all_matrices(2, 1, 3, 1 << 20).unwrap().count(), 9);
        let first: Vec<_> = all_matrices(2, 1, 2, 16).unwrap().collect();
        assert_eq!(first[1].entries(), &[0, 1]);
        assert!(all_matrices(4, 4, 2, 1 << 10).is_err());
    }

    fn span_size(m: &GeneratorMatrix) -> usize {
        let mut cw = m.enumerate_codewords().unwrap().to_vecs();
        cw.sort();
        cw.dedup();
        cw.len()
    }

    proptest! {
        #[test]
        fn rank_matches_span_size(
            (p, n, k, e) in (prop::sample::select(vec![2u64, 3, 5]), 1usize..5, 1usize..4)
                .prop_flat_map(|(p, n, k)| (Just(p), Just(n), Just(k), prop::collection::vec(0..p, n * k)))
        ) {
            let m = GeneratorMatrix::new(p, n, k, e).unwrap();
            prop_assert_eq!((p as usize).pow(m.rank() as u32), span_size(&m));
        }

        #[test]
        fn codeword_list_matches_matvec(
            (p, n, k, e) in (prop::sample::select(vec![2u64, 3, 7]), 1usize..4, 1usize..3)
                .prop_flat_map(|(p, n, k)| (Just(p), Just(n), Just(k), prop::collection::vec(0..p, n * k)))
        ) {
            let m = GeneratorMatrix::new(p, n, k, e).unwrap();
            let cw = m.enumerate_codewords().unwrap();
            for idx in 0..cw.len() {
                let mut x = vec![0u64; k];
                let mut r = idx as u64;
                for slot in x.iter_mut().rev() {
                    *slot = r % p;
                    r /= p;
                }
                let expect = m.matvec(&x).unwrap();
                prop_assert_eq!(cw.get(idx), expect.as_slice());
            }
        }
    }
}
