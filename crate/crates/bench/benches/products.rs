use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use itp_bench::sequences;
use itp_core::products::{classify_product, ClassifyOptions};

fn classify(c: &mut Criterion) {
    let mut group = c.benchmark_group("classify_product");
    for (name, seq) in sequences() {
        group.bench_function(name, |bench| {
            bench.iter(|| classify_product(black_box(&seq), ClassifyOptions::default()))
        });
    }
    group.finish();
}

criterion_group!(benches, classify);
criterion_main!(benches);
