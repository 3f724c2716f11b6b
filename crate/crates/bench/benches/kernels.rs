use criterion::{criterion_group, criterion_main, Criterion};
use lattigauss::gf::{rank_count, sample_matrix};
use lattigauss::lattice::{discrete_gaussian, DEFAULT_GAUSSIAN_TOL};
use lattigauss::params::solve_scale;
use lattigauss::simulate::batch_rng;
use lattigauss::theta::{jacobi_theta, theta_construction_a};
use lattigauss::{ConstructionALattice, EnsembleSpec, GeneratorMatrix, ParameterQuadruple};
use rand::Rng;
use std::hint::black_box;

fn lattice_12_3_23() -> ConstructionALattice {
    let a = solve_scale(12, 3, 23, 1.0, 3.0).unwrap();
    let q = ParameterQuadruple::new(12, 3, 23, a).unwrap();
    let mut rng = batch_rng(1, 0, 0);
    let m = sample_matrix(&EnsembleSpec::FullRankOnly, &q, &mut rng).unwrap();
    ConstructionALattice::new(q, m).unwrap()
}

fn decode(c: &mut Criterion) {
    let lat = lattice_12_3_23();
    let mut rng = batch_rng(2, 0, 0);
    let ys: Vec<Vec<f64>> = (0..64)
        .map(|_| (0..12).map(|_| rng.random_range(-3.0..3.0)).collect())
        .collect();
    let mut i = 0;
    c.bench_function("decode_cvp (12,3,23)", |b| {
        b.iter(|| {
            i = (i + 1) % ys.len();
            black_box(lat.decode_cvp(&ys[i]).unwrap())
        })
    });
}

fn theta(c: &mut Criterion) {
    c.bench_function("jacobi_theta tau=0.5", |b| {
        b.iter(|| jacobi_theta(black_box(0.5)).unwrap())
    });
    c.bench_function("jacobi_theta tau=2", |b| {
        b.iter(|| jacobi_theta(black_box(2.0)).unwrap())
    });
    let m = GeneratorMatrix::identity(7, 4, 2).unwrap();
    c.bench_function("theta_construction_a (4,2,7)", |b| {
        b.iter(|| theta_construction_a(&m, black_box(0.8), 1.0).unwrap())
    });
}

fn rank(c: &mut Criterion) {
    c.bench_function("rank 60x15 over F_1361", |b| {
        let mut rng = batch_rng(3, 0, 0);
        let e: Vec<u64> = (0..60 * 15).map(|_| rng.random_range(0..1361)).collect();
        let m = GeneratorMatrix::new(1361, 60, 15, e).unwrap();
        b.iter(|| black_box(&m).rank())
    });
    c.bench_function("rank_count (10,4,5)", |b| {
        b.iter(|| rank_count(10, 4, black_box(5), 4).unwrap())
    });
}

fn gaussian(c: &mut Criterion) {
    let q = ParameterQuadruple::new(2, 1, 2, 1.0).unwrap();
    let lat = ConstructionALattice::new(
        q,
        GeneratorMatrix::from_rows(2, &[vec![1], vec![1]]).unwrap(),
    )
    .unwrap();
    c.bench_function("discrete_gaussian D2 sigma=3", |b| {
        b.iter(|| {
            discrete_gaussian(&lat, black_box(3.0), &[0.0, 0.0], DEFAULT_GAUSSIAN_TOL).unwrap()
        })
    });
}

criterion_group!(benches, decode, theta, rank, gaussian);
criterion_main!(benches);
