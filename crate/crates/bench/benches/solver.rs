use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use pebms::{
    fuzz_campaign, picard_solve, verify_contraction, AnalyticMap, ContractionSpec, FuzzConfig,
    Space,
};
use pebms_bench::max_space;

fn picard(c: &mut Criterion) {
    let space = max_space();
    let map = AnalyticMap::parse("x/4", &space).unwrap();
    let spec = ContractionSpec::banach(0.25).unwrap();
    c.bench_function("picard_solve/banach_quarter", |b| {
        b.iter(|| picard_solve(&space, &map, black_box(1.0), 1e-9, 10_000, Some(spec)).unwrap())
    });
    let sample = space.sample(41);
    c.bench_function("verify_contraction/grid41", |b| {
        b.iter(|| verify_contraction(&space, &map, spec, black_box(&sample)).unwrap())
    });
}

fn fuzzing(c: &mut Criterion) {
    let config = FuzzConfig {
        trials: 100,
        ..FuzzConfig::default()
    };
    c.bench_function("fuzz_campaign/100", |b| {
        b.iter(|| fuzz_campaign(black_box(&config)).unwrap())
    });
}

criterion_group!(benches, picard, fuzzing);
criterion_main!(benches);
