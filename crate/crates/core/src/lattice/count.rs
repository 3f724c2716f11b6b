use super::ConstructionALattice;
use crate::error::{invalid, Error, Result};
use crate::theta::ln_ball_volume;

/// Upper limit on lattice points visited by a single enumeration.
pub const MAX_ENUMERATED_POINTS: u64 = 10_000_000;

/// Which points are left out of a ball count. The origin is always excluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exclude {
    Origin,
    /// The scaled sublattice `a·pZ^n` (which contains the origin).
    Sublattice(u64),
}

impl Exclude {
    fn skips(&self, z: &[i64]) -> bool {
        match *self {
            Exclude::Origin => z.iter().all(|&v| v == 0),
            Exclude::Sublattice(p) => z.iter().all(|&v| v.rem_euclid(p as i64) == 0),
        }
    }
}

/// Point-count bound `μ(B_n(0,1)) (r/a + √n/2)^n` for `aZ^n` in any ball of radius `r`.
pub fn ball_point_count_bound(n: usize, a: f64, r: f64) -> f64 {
    let nf = n as f64;
    (ln_ball_volume(n) + nf * (r / a + nf.sqrt() / 2.0).ln()).exp()
}

impl ConstructionALattice {
    /// Calls `f(z, ‖a·z - center‖²)` for every lattice point in the open ball
    /// `B(center, r)`, coset by coset. Returns the number of points visited.
    pub fn visit_ball<F: FnMut(&[i64], f64)>(
        &self,
        center: &[f64],
        r: f64,
        mut f: F,
    ) -> Result<u64> {
        self.check_dim(center)?;
        if !(r >= 0.0 && r.is_finite()) {
            return Err(invalid(format!(
                "radius r = {r} must be finite and nonnegative"
            )));
        }
        let r2 = r * r;
        let mut visited = 0u64;
        let mut z = vec![0i64; self.n];
        for c in self.cosets() {
            self.visit_coset(c, center, r2, 0, r2, &mut z, &mut visited, &mut f)?;
        }
        Ok(visited)
    }

    #[allow(clippy::too_many_arguments)]
    fn visit_coset<F: FnMut(&[i64], f64)>(
        &self,
        c: &[u64],
        center: &[f64],
        r2: f64,
        i: usize,
        rem: f64,
        z: &mut Vec<i64>,
        visited: &mut u64,
        f: &mut F,
    ) -> Result<()> {
        if i == self.n {
            let d2: f64 = z
                .iter()
                .zip(center)
                .map(|(&v, &x)| (self.a * v as f64 - x).powi(2))
                .sum();
            if d2 < r2 {
                *visited += 1;
                if *visited > MAX_ENUMERATED_POINTS {
                    return Err(Error::EnumerationCap {
                        requested: *visited as f64,
                        cap: MAX_ENUMERATED_POINTS as f64,
                    });
                }
                f(z, d2);
            }
            return Ok(());
        }
        let m = self.modulus as f64;
        let s = rem.max(0.0).sqrt();
        let lo = (((center[i] - s) / self.a - c[i] as f64) / m).floor() as i64 - 1;
        let hi = (((center[i] + s) / self.a - c[i] as f64) / m).ceil() as i64 + 1;
        // Pruning keeps a relative margin; the leaf test is exact.
        let slack = rem * 1e-12 + 1e-300;
        for t in lo..=hi {
            let v = c[i] as i64 + self.modulus as i64 * t;
            let d = (self.a * v as f64 - center[i]).powi(2);
            if d < rem + slack {
                z[i] = v;
                self.visit_coset(c, center, r2, i + 1, rem - d, z, visited, f)?;
            }
        }
        Ok(())
    }

    /// Integer vectors of all lattice points in the open ball `B(center, r)`.
    pub fn points_in_ball(&self, center: &[f64], r: f64) -> Result<Vec<Vec<i64>>> {
        let mut out = Vec::new();
        self.visit_ball(center, r, |z, _| out.push(z.to_vec()))?;
        Ok(out)
    }

    /// `N_{B(center, r)}` with the origin (and optionally a sublattice) left out.
    pub fn count_in_ball(&self, center: &[f64], r: f64, exclude: Exclude) -> Result<u64> {
        let mut count = 0u64;
        self.visit_ball(center, r, |z, _| {
            if !exclude.skips(z) {
                count += 1;
            }
        })?;
        Ok(count)
    }

    /// Length of a shortest nonzero lattice vector.
    pub fn shortest_vector_norm(&self) -> Result<f64> {
        // a·p·e_1 is always a lattice vector.
        let r = self.a * self.modulus as f64 * (1.0 + 1e-9);
        let origin = vec![0.0; self.n];
        let mut best = f64::INFINITY;
        self.visit_ball(&origin, r, |z, d2| {
            if z.iter().any(|&v| v != 0) {
                best = best.min(d2);
            }
        })?;
        Ok(best.sqrt())
    }
}
