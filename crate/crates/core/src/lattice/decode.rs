use super::ConstructionALattice;
use crate::error::Result;

/// `x` rounded to the nearest integer, halves away from zero.
fn round_half_away(x: f64) -> f64 {
    x.round()
}

impl ConstructionALattice {
    /// Closest lattice point to `y`, as the integer vector `z` with point `a·z`.
    ///
    /// Each coset is solved coordinatewise by rounding; cosets are scanned in
    /// message-index order and only a strictly closer coset replaces the
    /// incumbent, so exact ties go to the smallest message index.
    pub fn decode_integer(&self, y: &[f64]) -> Result<Vec<i64>> {
        self.check_dim(y)?;
        let (n, m) = (self.n, self.modulus as usize);
        let mf = self.modulus as f64;
        let mut best_z = vec![0i64; m * n];
        let mut best_d = vec![0f64; m * n];
        for (i, &yi) in y.iter().enumerate() {
            let t = yi / self.a;
            for r in 0..m {
                let z = r as f64 + mf * round_half_away((t - r as f64) / mf);
                let diff = yi - self.a * z;
                best_z[i * m + r] = z as i64;
                best_d[i * m + r] = diff * diff;
            }
        }
        let mut best = f64::INFINITY;
        let mut winner = 0;
        'cosets: for (ci, c) in self.cosets().enumerate() {
            let mut s = 0.0;
            for (i, &r) in c.iter().enumerate() {
                s += best_d[i * m + r as usize];
                if s >= best {
                    continue 'cosets;
                }
            }
            best = s;
            winner = ci;
        }
        let c = self.coset(winner);
        Ok(c.iter()
            .enumerate()
            .map(|(i, &r)| best_z[i * m + r as usize])
            .collect())
    }

    /// Closest lattice point to `y` (see [`Self::decode_integer`]).
    pub fn decode_cvp(&self, y: &[f64]) -> Result<Vec<f64>> {
        Ok(self.point(&self.decode_integer(y)?))
    }

    /// Whether `y` decodes to the origin, i.e. lies in the decision region of 0.
    pub fn decodes_to_origin(&self, y: &[f64]) -> Result<bool> {
        Ok(self.decode_integer(y)?.iter().all(|&z| z == 0))
    }
}
