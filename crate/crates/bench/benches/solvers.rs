use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gammalind::oracle::{build_model, free_fermion_union, full_spectrum};
use gammalind::graph::ring;
use gammalind::{pfaffian, solve_number, solve_parity, SolveOptions};
use gammalind_bench::{antisymmetric_complex, antisymmetric_real, honeycomb_problem};
use std::hint::black_box;

fn pfaffians(c: &mut Criterion) {
    let mut group = c.benchmark_group("pfaffian");
    for dim in [32, 128, 512] {
        let m = antisymmetric_real(dim, 1);
        group.bench_with_input(BenchmarkId::new("real", dim), &m, |b, m| b.iter(|| pfaffian(black_box(m)).unwrap()));
    }
    for dim in [32, 128] {
        let m = antisymmetric_complex(dim, 2);
        group.bench_with_input(BenchmarkId::new("complex", dim), &m, |b, m| b.iter(|| pfaffian(black_box(m)).unwrap()));
    }
    group.finish();
}

/// Honeycomb tori with 32, 128 and 512 sites.
const SIZES: [(usize, usize); 3] = [(4, 4), (8, 8), (16, 16)];

fn parity_solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("parity");
    group.sample_size(10);
    for (nx, ny) in SIZES {
        let p = honeycomb_problem(nx, ny, 1.0, &[0], &[]);
        let n = p.n();
        group.bench_with_input(BenchmarkId::new("eigenvalues", n), &p, |b, p| {
            b.iter(|| solve_parity(black_box(p), &SolveOptions::without_conditioning()).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("eigenvectors", n), &p, |b, p| {
            b.iter(|| solve_parity(black_box(p), &SolveOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn number_solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("number");
    group.sample_size(10);
    for (nx, ny) in SIZES {
        let p = honeycomb_problem(nx, ny, 1.0, &[], &[0]);
        group.bench_with_input(BenchmarkId::new("gap_n1", p.n()), &p, |b, p| {
            b.iter(|| solve_number(black_box(p), &SolveOptions::without_conditioning()).unwrap().gap(1).unwrap())
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    for sites in [3, 4] {
        let model = build_model(&ring(sites).unwrap(), &vec![1.0; sites]).unwrap();
        group.bench_with_input(BenchmarkId::new("superoperator", sites), &model, |b, m| {
            b.iter(|| full_spectrum(black_box(m)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("free_fermion_union", sites), &model, |b, m| {
            b.iter(|| free_fermion_union(black_box(m)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, pfaffians, parity_solver, number_solver, oracle);
criterion_main!(benches);
