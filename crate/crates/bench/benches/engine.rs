use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use mixedpowers::applications::planar::{planar_core_estimate, PlanarCoreQuery};
use mixedpowers::applications::{trivariate_norm, trivariate_system};
use mixedpowers::function_system::direction_of;
use mixedpowers::saddle_engine::{gaussian_leading, integral_small};
use mixedpowers::{exact_coefficient, solve_critical, taylor_F, ExponentVector, Precision};

fn scaled(s: u64) -> ExponentVector {
    ExponentVector::new(vec![3 * s, 4 * s, 2 * s]).unwrap()
}

fn oracle(c: &mut Criterion) {
    let system = trivariate_system();
    let mut group = c.benchmark_group("exact_coefficient");
    for s in [10u64, 50, 200] {
        let n = scaled(s);
        group.bench_with_input(BenchmarkId::from_parameter(s), &n, |b, n| {
            b.iter(|| exact_coefficient(&system, black_box(n)).unwrap())
        });
    }
    group.finish();
}

fn critical_and_phase(c: &mut Criterion) {
    let system = trivariate_system();
    let d = direction_of(&scaled(1), &trivariate_norm()).unwrap();
    c.bench_function("solve_critical", |b| b.iter(|| solve_critical(&system, black_box(&d), None).unwrap()));
    c.bench_function("taylor_F order 6", |b| {
        b.iter(|| taylor_F(&system, black_box(&d), 6, Precision::default()).unwrap())
    });
}

fn integrals(c: &mut Criterion) {
    let system = trivariate_system();
    let norm = trivariate_norm();
    let p = Precision::default();
    let mut group = c.benchmark_group("saddle");
    for s in [10u64, 100, 1000] {
        let n = scaled(s);
        group.bench_with_input(BenchmarkId::new("integral_small", s), &n, |b, n| {
            b.iter(|| integral_small(&system, black_box(n), &norm, p).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("gaussian_leading", s), &n, |b, n| {
            b.iter(|| gaussian_leading(&system, black_box(n), &norm, p).unwrap())
        });
    }
    group.finish();
    let q = PlanarCoreQuery::new(300, 100).unwrap();
    c.bench_function("planar_core_estimate (300,100)", |b| {
        b.iter(|| planar_core_estimate(black_box(&q), p).unwrap())
    });
}

criterion_group!(benches, oracle, critical_and_phase, integrals);
criterion_main!(benches);
