use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use cubic_core::classgroups::bqf_torsion_table;
use cubic_core::{canonicalize, enumerate_orbits, BinaryCubicForm, Sign};

fn enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate_orbits");
    group.sample_size(10);
    for x in [100_000u64, 1_000_000] {
        for sign in Sign::BOTH {
            group.bench_with_input(BenchmarkId::new(sign.to_string(), x), &x, |b, &x| {
                b.iter(|| enumerate_orbits(sign, black_box(x)).unwrap())
            });
        }
    }
    group.finish();
}

fn canonical_forms(c: &mut Criterion) {
    let forms: Vec<BinaryCubicForm> = (0..256i64)
        .map(|i| BinaryCubicForm::new(1 + i % 7, 3 * i - 380, i * i % 97 - 48, 2 * i % 11 - 5))
        .collect();
    c.bench_function("canonicalize/256", |b| {
        b.iter(|| {
            for f in &forms {
                let _ = black_box(canonicalize(black_box(f)));
            }
        })
    });
}

fn torsion(c: &mut Criterion) {
    let mut group = c.benchmark_group("bqf_torsion_table");
    group.sample_size(10);
    group.bench_function("1e5", |b| b.iter(|| bqf_torsion_table(black_box(100_000)).unwrap()));
    group.finish();
}

criterion_group!(benches, enumeration, canonical_forms, torsion);
criterion_main!(benches);
