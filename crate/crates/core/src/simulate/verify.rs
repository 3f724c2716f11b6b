use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::batch_rng;
use crate::bounds::{a_fl, b_fl, b_fl_full_rank};
use crate::error::{invalid, Result};
use crate::gf::{
    all_matrices, checked_power, rank_count, xi_stats_capped, xi_zero_uniform_exact, EnsembleSpec,
    ExplicitEnsemble, GeneratorMatrix,
};
use crate::lattice::{ball_point_count_bound, ConstructionALattice, Exclude};
use crate::params::ParameterQuadruple;
use crate::theta::theta_construction_a;

/// Largest ensemble support `p^{nk}` handled exhaustively.
pub const SMALL_INSTANCE_CAP: u64 = 1 << 16;
const CODEWORD_CAP: u64 = 1 << 22;
const RESIDUE_CAP: u64 = 1 << 20;

pub const GRID_SCALES: [f64; 3] = [0.5, 1.0, 2.0];
pub const GRID_TAUS: [f64; 3] = [0.5, 1.0, 2.0];
const GRID_RADII: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
/// Relative slack for floating-point (non-integer) comparisons.
const FLOAT_SLACK: f64 = 1e-12;

/// One inequality or identity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub check: String,
    pub instance: String,
    pub detail: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl CheckRow {
    fn new(check: &str, instance: &str, detail: String, lhs: f64, rhs: f64, holds: bool) -> Self {
        Self {
            check: check.into(),
            instance: instance.into(),
            detail,
            lhs,
            rhs,
            holds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub rows: Vec<CheckRow>,
}

impl SuiteReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| !r.holds).count()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }
}

/// Instances `(n, k, p)` with `p^{nk} ≤ 2^16` used by the exhaustive suite.
pub fn small_instance_grid() -> Vec<(usize, usize, u64)> {
    vec![
        (2, 1, 2),
        (2, 1, 3),
        (2, 1, 5),
        (2, 1, 7),
        (2, 1, 11),
        (3, 1, 2),
        (3, 2, 2),
        (3, 1, 3),
        (3, 2, 3),
        (3, 1, 5),
        (4, 1, 2),
        (4, 2, 2),
        (4, 3, 2),
        (4, 1, 3),
        (4, 2, 3),
        (4, 1, 5),
        (5, 2, 2),
        (5, 3, 2),
        (6, 1, 2),
        (6, 2, 2),
        (8, 1, 2),
        (2, 1, 13),
        (3, 1, 7),
    ]
}

/// Sixteen balls: four centres (origin, a fixed offset, two seeded random
/// points in `[-2a, 2a]^n`) times radii `{0.5, 1, 2, 4}·a`.
pub fn ball_grid(n: usize, a: f64, seed: u64) -> Vec<(Vec<f64>, f64)> {
    let mut rng = batch_rng(seed, 0xBA11, n as u64);
    let mut centers = vec![
        vec![0.0; n],
        (0..n)
            .map(|i| a * if i % 2 == 0 { 0.3 } else { 0.4 })
            .collect::<Vec<_>>(),
    ];
    for _ in 0..2 {
        centers.push((0..n).map(|_| a * rng.random_range(-2.0..2.0)).collect());
    }
    centers
        .into_iter()
        .flat_map(|c| GRID_RADII.iter().map(move |&r| (c.clone(), r * a)))
        .collect()
}

/// Three explicit ensembles: a point mass at `[I; 0]`, an even mixture of
/// `[I; 0]` and a random matrix, and a skewed mixture of three random matrices.
pub fn explicit_test_ensembles(
    n: usize,
    k: usize,
    p: u64,
    seed: u64,
) -> Result<Vec<(String, ExplicitEnsemble)>> {
    let mut rng = batch_rng(seed, 0xE5, (n * 1000 + k) as u64 * 1_000_003 + p);
    let mut random = || {
        let e = (0..n * k).map(|_| rng.random_range(0..p)).collect();
        GeneratorMatrix::new(p, n, k, e)
    };
    let id = GeneratorMatrix::identity(p, n, k)?;
    Ok(vec![
        (
            "point-mass".into(),
            ExplicitEnsemble::point_mass(id.clone()),
        ),
        (
            "two-point".into(),
            ExplicitEnsemble::new(vec![(id, 0.5), (random()?, 0.5)])?,
        ),
        (
            "three-point".into(),
            ExplicitEnsemble::new(vec![(random()?, 0.2), (random()?, 0.3), (random()?, 0.5)])?,
        ),
    ])
}

fn label(n: usize, k: usize, p: u64) -> String {
    format!("({n},{k},{p})")
}

fn ens_name(ens: &EnsembleSpec) -> &'static str {
    match ens {
        EnsembleSpec::AllMatrices => "all",
        EnsembleSpec::FullRankOnly => "full-rank",
        EnsembleSpec::Explicit(_) => "explicit",
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(","))
}

fn residue_index<I: IntoIterator<Item = i64>>(z: I, p: u64) -> usize {
    let mut idx = 0usize;
    let mut w = 1usize;
    for v in z {
        idx += v.rem_euclid(p as i64) as usize * w;
        w *= p as usize;
    }
    idx
}

/// Exhaustive support with its codeword statistics.
struct Support {
    weights: Vec<f64>,
    matrices: Vec<GeneratorMatrix>,
    /// Whether all weights are equal (uniform ensembles), enabling integer arithmetic.
    uniform: bool,
    /// Distinct nonzero codeword residue indices, per matrix.
    distinct: Vec<Vec<usize>>,
    /// `#{(M, u) : M u = y}` over the support (uniform ensembles only).
    hits: Vec<u128>,
    /// `Pr(G u = y)`.
    mass: Vec<f64>,
}

impl Support {
    fn new(q: &ParameterQuadruple, ens: &EnsembleSpec) -> Result<Self> {
        let (n, k, p) = (q.n(), q.k(), q.p());
        let pn = checked_power(p, n, RESIDUE_CAP)? as usize;
        let pk = checked_power(p, k, CODEWORD_CAP)? as f64;
        let pairs = ens.support(q, SMALL_INSTANCE_CAP)?;
        let uniform = !matches!(ens, EnsembleSpec::Explicit(_));
        let mut hits = vec![0u128; pn];
        let mut mass = vec![0.0; pn];
        let mut distinct = Vec::with_capacity(pairs.len());
        for (m, w) in &pairs {
            let mut d = Vec::new();
            for c in m.enumerate_codewords()?.iter() {
                let idx = residue_index(c.iter().map(|&v| v as i64), p);
                hits[idx] += 1;
                mass[idx] += w / pk;
                d.push(idx);
            }
            d.sort_unstable();
            d.dedup();
            d.retain(|&i| i != 0);
            distinct.push(d);
        }
        let (matrices, weights) = pairs.into_iter().unzip();
        Ok(Self {
            weights,
            matrices,
            uniform,
            distinct,
            hits,
            mass,
        })
    }
}

/// Counts of the nonzero points of `aZ^n` in an open ball, by residue class mod `p`.
fn ball_histogram(n: usize, a: f64, p: u64, center: &[f64], r: f64) -> Result<(Vec<u64>, u64)> {
    let pn = checked_power(p, n, RESIDUE_CAP)? as usize;
    let lat = ConstructionALattice::scaled_integers(n, a)?;
    let mut hist = vec![0u64; pn];
    let mut nonzero = 0u64;
    lat.visit_ball(center, r, |z, _| {
        if z.iter().any(|&v| v != 0) {
            hist[residue_index(z.iter().copied(), p)] += 1;
            nonzero += 1;
        }
    })?;
    Ok((hist, nonzero))
}

fn pow_i128(p: u64, e: usize) -> Result<i128> {
    (p as i128)
        .checked_pow(e as u32)
        .ok_or_else(|| invalid("exact arithmetic overflows i128"))
}

/// `E_G[N_B(aΛ(G) \ apZ^n)] ≤ p^k ξ^max(G) N_B(aZ^n)` for every ball, and for
/// the full-rank ensemble additionally
/// `≤ p^k (1 - ξ_p) / ((1 - p^{k-n})(p^n - 1)) · N_B(aZ^n)`.
///
/// Uniform ensembles are compared in exact integer arithmetic.
pub fn verify_counting_averaging(
    q: &ParameterQuadruple,
    ens: &EnsembleSpec,
    balls: &[(Vec<f64>, f64)],
) -> Result<Vec<CheckRow>> {
    let (n, k, p, a) = (q.n(), q.k(), q.p(), q.a());
    let sup = Support::new(q, ens)?;
    let inst = format!("{} a={a}", label(n, k, p));
    let size = sup.matrices.len() as u128;
    let max_hits = sup.hits.iter().skip(1).copied().max().unwrap_or(0);
    let xi_max = sup.mass.iter().skip(1).copied().fold(0.0, f64::max);
    let pk = checked_power(p, k, CODEWORD_CAP)? as f64;
    let mut rows = Vec::with_capacity(2 * balls.len());
    for (center, r) in balls {
        let (hist, nz) = ball_histogram(n, a, p, center, *r)?;
        let counts: Vec<u64> = sup
            .distinct
            .iter()
            .map(|d| d.iter().map(|&i| hist[i]).sum())
            .collect();
        let detail = format!("ens={} c={} r={r}", ens_name(ens), fmt_vec(center));
        if sup.uniform {
            let total: u128 = counts.iter().map(|&c| c as u128).sum();
            let rhs = max_hits * nz as u128;
            rows.push(CheckRow::new(
                "zero-excluded-count",
                &inst,
                detail.clone(),
                total as f64 / size as f64,
                rhs as f64 / size as f64,
                total <= rhs,
            ));
        } else {
            let lhs: f64 = sup
                .weights
                .iter()
                .zip(&counts)
                .map(|(w, &c)| w * c as f64)
                .sum();
            let rhs = pk * xi_max * nz as f64;
            rows.push(CheckRow::new(
                "zero-excluded-count",
                &inst,
                detail.clone(),
                lhs,
                rhs,
                lhs <= rhs + FLOAT_SLACK * rhs.max(1.0),
            ));
        }
        if matches!(ens, EnsembleSpec::FullRankOnly) {
            let (pn, pk) = (pow_i128(p, n)?, pow_i128(p, k)?);
            let one_minus_xi = Ratio::from_integer(1) - xi_zero_uniform_exact(n, k, p)?;
            let coeff =
                Ratio::from_integer(pk) * one_minus_xi * Ratio::new(pn, (pn - pk) * (pn - 1));
            let total: u128 = counts.iter().map(|&c| c as u128).sum();
            let lhs = Ratio::new(total as i128, size as i128);
            let rhs = coeff * Ratio::from_integer(nz as i128);
            let f = |x: &Ratio<i128>| *x.numer() as f64 / *x.denom() as f64;
            rows.push(CheckRow::new(
                "full-rank-count",
                &inst,
                detail,
                f(&lhs),
                f(&rhs),
                lhs <= rhs,
            ));
        }
    }
    Ok(rows)
}

/// `E_G[Θ_{aΛ(G)}(τ)] ≤ A^Fl(G, τ)` and, for the full-rank ensemble,
/// `E[ε_Λ(1/√(2πτ))] ≤ B^Fl` in both its uniform-statistics and exhaustive forms.
pub fn verify_theta_averaging(
    q: &ParameterQuadruple,
    ens: &EnsembleSpec,
    taus: &[f64],
) -> Result<Vec<CheckRow>> {
    let (n, k, p, a) = (q.n(), q.k(), q.p(), q.a());
    let inst = format!("{} a={a}", label(n, k, p));
    let support = ens.support(q, SMALL_INSTANCE_CAP)?;
    let stats = xi_stats_capped(ens, q, CODEWORD_CAP)?;
    let lattices: Vec<ConstructionALattice> = if matches!(ens, EnsembleSpec::FullRankOnly) {
        support
            .iter()
            .map(|(m, _)| ConstructionALattice::new(*q, m.clone()))
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let mut rows = Vec::new();
    for &tau in taus {
        let detail = format!("ens={} tau={tau}", ens_name(ens));
        let (mut mean, mut budget) = (0.0, 0.0);
        for (m, w) in &support {
            let t = theta_construction_a(m, a, tau)?;
            mean += w * t.value;
            budget += w * t.abs_error;
        }
        let rhs = a_fl(q, &stats, tau)?.a_fl;
        rows.push(CheckRow::new(
            "theta-mean",
            &inst,
            detail.clone(),
            mean,
            rhs,
            mean <= rhs + budget + FLOAT_SLACK * rhs,
        ));
        if !lattices.is_empty() {
            let sigma = 1.0 / (2.0 * std::f64::consts::PI * tau).sqrt();
            let mut eps = 0.0;
            for (lat, (_, w)) in lattices.iter().zip(&support) {
                eps += w * lat.flatness_factor(sigma)?;
            }
            let slack = |b: f64| 1e-10 * (1.0 + b.abs());
            let b = b_fl(q, tau)?;
            rows.push(CheckRow::new(
                "flatness-mean",
                &inst,
                detail.clone(),
                eps,
                b,
                eps <= b + slack(b),
            ));
            let bf = b_fl_full_rank(q, tau)?;
            rows.push(CheckRow::new(
                "flatness-mean-exhaustive",
                &inst,
                detail,
                eps,
                bf,
                eps <= bf + slack(bf),
            ));
        }
    }
    Ok(rows)
}

/// Exhaustive rank law against the closed-form counts, the total, and
/// `Pr(rank = k) > 1 - p^{k-n}`.
pub fn verify_rank_law(n: usize, k: usize, p: u64) -> Result<Vec<CheckRow>> {
    let inst = label(n, k, p);
    let mut hist = vec![0u128; k.min(n) + 1];
    for m in all_matrices(n, k, p, SMALL_INSTANCE_CAP)? {
        hist[m.rank()] += 1;
    }
    let mut rows = Vec::new();
    for (j, &h) in hist.iter().enumerate() {
        let f = rank_count(n, k, p, j)?;
        rows.push(CheckRow::new(
            "rank-count",
            &inst,
            format!("j={j}"),
            h as f64,
            f as f64,
            h == f,
        ));
    }
    let total = checked_power(p, n * k, SMALL_INSTANCE_CAP)? as u128;
    let sum: u128 = (0..hist.len())
        .map(|j| rank_count(n, k, p, j))
        .sum::<Result<u128>>()?;
    rows.push(CheckRow::new(
        "rank-total",
        &inst,
        String::new(),
        sum as f64,
        total as f64,
        sum == total,
    ));
    if k < n {
        let (pn, pk) = (pow_i128(p, n)? as u128, pow_i128(p, k)? as u128);
        let full = hist[k];
        rows.push(CheckRow::new(
            "full-rank-mass",
            &inst,
            String::new(),
            full as f64 / total as f64,
            1.0 - (pk as f64 / pn as f64),
            full * pn > total * (pn - pk),
        ));
    }
    Ok(rows)
}

/// Exhaustive `Pr(G u = 0)` over uniform `G` and `u` against the closed form.
pub fn verify_xi_zero(n: usize, k: usize, p: u64) -> Result<CheckRow> {
    let q = ParameterQuadruple::new(n, k, p, 1.0)?;
    let sup = Support::new(&q, &EnsembleSpec::AllMatrices)?;
    let denom = sup.matrices.len() as i128 * pow_i128(p, k)?;
    let exhaustive = Ratio::new(sup.hits[0] as i128, denom);
    let formula = xi_zero_uniform_exact(n, k, p)?;
    let f = |x: &Ratio<i128>| *x.numer() as f64 / *x.denom() as f64;
    Ok(CheckRow::new(
        "xi-zero",
        &label(n, k, p),
        format!("{}/{}", exhaustive.numer(), exhaustive.denom()),
        f(&exhaustive),
        f(&formula),
        exhaustive == formula,
    ))
}

/// `E_all[f] ≥ (1 - p^{k-n}) E_full[f]` for seeded random nonnegative integer
/// functions and a few structured ones, in exact arithmetic.
pub fn verify_full_rank_comparison(n: usize, k: usize, p: u64, seed: u64) -> Result<Vec<CheckRow>> {
    let inst = label(n, k, p);
    let mats: Vec<GeneratorMatrix> = all_matrices(n, k, p, SMALL_INSTANCE_CAP)?.collect();
    let full: Vec<bool> = mats.iter().map(|m| m.rank() == k).collect();
    let n_all = mats.len() as u128;
    let n_full = full.iter().filter(|&&f| f).count() as u128;
    let (pn, pk) = (pow_i128(p, n)? as u128, pow_i128(p, k)? as u128);
    let mut rng = batch_rng(seed, 0xF0, (n * 1000 + k) as u64 * 1_000_003 + p);
    let mut functions: Vec<(String, Vec<u128>)> = vec![
        ("constant".into(), vec![1; mats.len()]),
        (
            "full-rank-indicator".into(),
            full.iter().map(|&f| f as u128).collect(),
        ),
        (
            "rank".into(),
            mats.iter().map(|m| m.rank() as u128).collect(),
        ),
    ];
    for i in 0..3 {
        functions.push((
            format!("random-{i}"),
            (0..mats.len())
                .map(|_| rng.random_range(0..1000u128))
                .collect(),
        ));
    }
    let mut rows = Vec::new();
    for (name, f) in functions {
        let s_all: u128 = f.iter().sum();
        let s_full: u128 = f
            .iter()
            .zip(&full)
            .filter(|(_, &fr)| fr)
            .map(|(v, _)| v)
            .sum();
        let lhs = s_all as f64 / n_all as f64;
        let rhs = s_full as f64 / n_full as f64 * (1.0 - pk as f64 / pn as f64);
        let holds = s_all * n_full * pn >= s_full * n_all * (pn - pk);
        rows.push(CheckRow::new(
            "full-rank-comparison",
            &inst,
            format!("f={name}"),
            lhs,
            rhs,
            holds,
        ));
    }
    Ok(rows)
}

/// Number of points of `aZ^n` in each ball against `μ(B_1)(r/a + √n/2)^n`.
pub fn verify_point_count_bound(
    n: usize,
    a: f64,
    balls: &[(Vec<f64>, f64)],
) -> Result<Vec<CheckRow>> {
    let lat = ConstructionALattice::scaled_integers(n, a)?;
    let inst = format!("n={n} a={a}");
    balls
        .iter()
        .map(|(c, r)| {
            let count = lat.visit_ball(c, *r, |_, _| {})? as f64;
            let bound = ball_point_count_bound(n, a, *r);
            Ok(CheckRow::new(
                "point-count",
                &inst,
                format!("c={} r={r}", fmt_vec(c)),
                count,
                bound,
                count <= bound,
            ))
        })
        .collect()
}

/// A ball `B(q, r)` holding a nonzero point of `apZ^n` has `‖q‖ ≥ ap - r`.
///
/// Each ball is also tried shifted by `ap·e_1` so that the premise is met.
pub fn verify_sublattice_separation(
    n: usize,
    a: f64,
    p: u64,
    balls: &[(Vec<f64>, f64)],
) -> Result<Vec<CheckRow>> {
    let ap = a * p as f64;
    let lat = ConstructionALattice::scaled_integers(n, ap)?;
    let inst = format!("n={n} a={a} p={p}");
    let mut rows = Vec::new();
    for (c, r) in balls {
        let mut shifted = c.clone();
        shifted[0] += ap;
        for center in [c, &shifted] {
            let hits = lat.count_in_ball(center, *r, Exclude::Origin)?;
            let norm = center.iter().map(|x| x * x).sum::<f64>().sqrt();
            let rhs = ap - r;
            rows.push(CheckRow::new(
                "sublattice-separation",
                &inst,
                format!("c={} r={r} hits={hits}", fmt_vec(center)),
                norm,
                rhs,
                hits == 0 || norm >= rhs - FLOAT_SLACK * ap,
            ));
        }
    }
    Ok(rows)
}

/// `(1 - ξ_p) p^n / ((1 - p^{k-n})(p^n - 1)) ≤ p²(p^{n-1} - 1)/((p-1)(p^n - 1)) < p/(p-1) ≤ 2`.
pub fn verify_collision_ratio_bound(n: usize, k: usize, p: u64) -> Result<CheckRow> {
    let (pn, pk, pi) = (pow_i128(p, n)?, pow_i128(p, k)?, p as i128);
    let one_minus_xi = Ratio::from_integer(1) - xi_zero_uniform_exact(n, k, p)?;
    let lhs = one_minus_xi * Ratio::new(pn * pn, (pn - pk) * (pn - 1));
    let mid = Ratio::new(pi * pi * (pn / pi - 1), (pi - 1) * (pn - 1));
    let rhs = Ratio::new(pi, pi - 1);
    let f = |x: &Ratio<i128>| *x.numer() as f64 / *x.denom() as f64;
    Ok(CheckRow::new(
        "collision-ratio",
        &label(n, k, p),
        format!("middle={:.12}", f(&mid)),
        f(&lhs),
        f(&rhs),
        lhs <= mid && mid < rhs && rhs <= Ratio::from_integer(2),
    ))
}

fn instance_rows(idx: usize, (n, k, p): (usize, usize, u64), seed: u64) -> Result<Vec<CheckRow>> {
    let mut rows = verify_rank_law(n, k, p)?;
    rows.push(verify_xi_zero(n, k, p)?);
    rows.push(verify_collision_ratio_bound(n, k, p)?);
    rows.extend(verify_full_rank_comparison(
        n,
        k,
        p,
        seed.wrapping_add(idx as u64),
    )?);
    let mut ensembles = vec![EnsembleSpec::AllMatrices, EnsembleSpec::FullRankOnly];
    ensembles.extend(
        explicit_test_ensembles(n, k, p, seed)?
            .into_iter()
            .map(|(_, e)| EnsembleSpec::Explicit(e)),
    );
    for &a in &GRID_SCALES {
        let q = ParameterQuadruple::new(n, k, p, a)?;
        let balls = ball_grid(n, a, seed);
        for ens in &ensembles {
            rows.extend(verify_counting_averaging(&q, ens, &balls)?);
            rows.extend(verify_theta_averaging(&q, ens, &GRID_TAUS)?);
        }
        rows.extend(verify_point_count_bound(n, a, &balls)?);
        rows.extend(verify_sublattice_separation(n, a, p, &balls)?);
    }
    Ok(rows)
}

/// Every exhaustive check over [`small_instance_grid`], instances run on
/// `workers` threads and reported in grid order.
pub fn run_small_instance_suite(seed: u64, workers: usize) -> Result<SuiteReport> {
    if workers == 0 {
        return Err(invalid("workers must be positive"));
    }
    let grid = small_instance_grid();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?;
    let parts: Vec<Vec<CheckRow>> = pool.install(|| {
        grid.par_iter()
            .enumerate()
            .map(|(i, &inst)| instance_rows(i, inst, seed))
            .collect::<Result<_>>()
    })?;
    Ok(SuiteReport {
        seed,
        rows: parts.into_iter().flatten().collect(),
    })
}
