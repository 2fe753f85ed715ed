use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use itp_bench::{global_rotation, parametric_pair, spin_pair};
use itp_core::{expectation_sweep, overlap_sweep, same_sector, truncated_overlap};

fn truncated(c: &mut Criterion) {
    let (a, b) = spin_pair();
    let mut group = c.benchmark_group("truncated_overlap");
    for n in [10usize, 64, 1_000, 100_000] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, &n| {
            bench.iter(|| truncated_overlap(black_box(&a), black_box(&b), n).unwrap())
        });
    }
    group.finish();
}

fn sweeps(c: &mut Criterion) {
    let (a, b) = spin_pair();
    let (pa, pb) = parametric_pair(0.5);
    let ns: Vec<usize> = (1..=1_000).collect();
    c.bench_function("overlap_sweep constant 1000", |bench| {
        bench.iter(|| overlap_sweep(black_box(&a), black_box(&b), &ns).unwrap())
    });
    c.bench_function("overlap_sweep parametric 1000", |bench| {
        bench.iter(|| overlap_sweep(black_box(&pa), black_box(&pb), &ns).unwrap())
    });
    let op = global_rotation();
    c.bench_function("expectation_sweep rotation 1000", |bench| {
        bench.iter(|| expectation_sweep(black_box(&op), black_box(&a), &ns).unwrap())
    });
}

fn sectors(c: &mut Criterion) {
    let (a, b) = spin_pair();
    let (pa, pb) = parametric_pair(0.25);
    c.bench_function("same_sector constant tails", |bench| {
        bench.iter(|| same_sector(black_box(&a), black_box(&b)))
    });
    c.bench_function("same_sector parametric tail", |bench| {
        bench.iter(|| same_sector(black_box(&pa), black_box(&pb)))
    });
}

criterion_group!(benches, truncated, sweeps, sectors);
criterion_main!(benches);
