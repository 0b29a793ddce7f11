//! Timing for the layers wrapped around a decode call: error sampling,
//! syndrome extraction, and a small end-to-end failure-rate estimate.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hdrg::{
    build_geometry, derive_stream, estimate_p, sample_correlated, sample_iid, syndrome_of,
    DecoderConfig, NoiseModel,
};

fn bench_sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample");
    for l in [16usize, 32] {
        let geom = build_geometry(l).expect("benchmark sizes are valid");
        let stream = derive_stream(0x5a3, &[l as u64]);
        group.bench_with_input(BenchmarkId::new("iid", l), &l, |b, _| {
            let mut rng = stream.rng();
            b.iter(|| black_box(sample_iid(&geom, black_box(0.05), &mut rng)))
        });
        group.bench_with_input(BenchmarkId::new("correlated", l), &l, |b, _| {
            let mut rng = stream.child(1).rng();
            b.iter(|| black_box(sample_correlated(&geom, black_box(0.03), 0.5, &mut rng)))
        });
    }
    group.finish();
}

fn bench_syndrome_extraction(c: &mut Criterion) {
    let mut group = c.benchmark_group("syndrome_of");
    for l in [16usize, 32] {
        let geom = build_geometry(l).expect("benchmark sizes are valid");
        let pattern = sample_iid(&geom, 0.05, &mut derive_stream(0x51d, &[l as u64]).rng());
        group.bench_with_input(BenchmarkId::from_parameter(l), &l, |b, _| {
            b.iter(|| black_box(syndrome_of(&geom, black_box(&pattern))))
        });
    }
    group.finish();
}

fn bench_estimate(c: &mut Criterion) {
    // One complete stop-at-N-failures estimate: sampling, decoding, and
    // failure checks together, sized to finish in a few hundred trials.
    let geom = build_geometry(8).expect("benchmark sizes are valid");
    let model = NoiseModel::Iid { p: 0.09 };
    let config = DecoderConfig::standard();
    let stream = derive_stream(0xe57, &[]);
    let mut group = c.benchmark_group("estimate_p");
    group.sample_size(10);
    group.bench_function("L8_20_failures", |b| {
        b.iter(|| {
            black_box(
                estimate_p(&geom, &model, &config, 20, 100_000, &stream)
                    .expect("estimate succeeds"),
            )
        })
    });
    group.finish();
}

criterion_group!(benches, bench_sampling, bench_syndrome_extraction, bench_estimate);
criterion_main!(benches);
