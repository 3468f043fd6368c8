use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use flatstir_core::analysis::is_real_rooted;
use flatstir_core::counting::{count_flattened_identity, count_flattened_series_approx, FlattenedCounter};
use flatstir_core::series::{descent_egf, descent_polynomial, egf_flattened};

fn totals(c: &mut Criterion) {
    let mut group = c.benchmark_group("totals_n25_k3");
    group.bench_function("recurrence", |b| {
        b.iter(|| FlattenedCounter::new(3).count(black_box(25)).unwrap())
    });
    group.bench_function("identity", |b| {
        b.iter(|| count_flattened_identity(black_box(25), 3).unwrap())
    });
    group.bench_function("egf", |b| {
        b.iter(|| egf_flattened(3, black_box(24)).egf_count(24).unwrap())
    });
    group.bench_function("series_approx_128", |b| {
        b.iter(|| count_flattened_series_approx(black_box(24), 3, 128).unwrap())
    });
    group.finish();
}

fn descent_series(c: &mut Criterion) {
    let mut group = c.benchmark_group("descent_egf");
    group.sample_size(10);
    for (k, order) in [(2, 16), (3, 16), (5, 25)] {
        group.bench_with_input(
            BenchmarkId::new(format!("k{k}"), order),
            &(k, order),
            |b, &(k, order)| b.iter(|| descent_egf(k, order)),
        );
    }
    group.finish();
}

fn real_roots(c: &mut Criterion) {
    let p = descent_polynomial(10, 2).unwrap();
    c.bench_function("sturm_real_rooted_n10_k2", |b| {
        b.iter(|| is_real_rooted(black_box(&p)).unwrap())
    });
}

criterion_group!(benches, totals, descent_series, real_roots);
criterion_main!(benches);
