use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use vll_bench::vorticity;
use vll_core::diagnostics::analyze_snapshot;
use vll_core::dynamics::{evolve, ForceSpec};
use vll_core::{ball_convolve, biot_savart, BallKernel};

fn fft(c: &mut Criterion) {
    let mut g = c.benchmark_group("fft_roundtrip");
    for n in [128, 256, 512] {
        let w = vorticity(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &w, |b, w| {
            b.iter(|| {
                let s = w.grid().forward_real(black_box(w.values()));
                black_box(w.grid().inverse_real(&s))
            })
        });
    }
    g.finish();
}

fn velocity(c: &mut Criterion) {
    let w = vorticity(256);
    c.bench_function("biot_savart_256", |b| b.iter(|| black_box(biot_savart(black_box(&w)).unwrap())));
}

fn ball(c: &mut Criterion) {
    let w = vorticity(256);
    c.bench_function("ball_kernel_build_256", |b| b.iter(|| black_box(BallKernel::new(w.grid(), 0.1).unwrap())));
    c.bench_function("ball_convolve_256", |b| b.iter(|| black_box(ball_convolve(black_box(&w), 0.1).unwrap())));
}

fn step(c: &mut Criterion) {
    let mut g = c.benchmark_group("evolve_10_steps");
    g.sample_size(10);
    for n in [128, 256] {
        let w = vorticity(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &w, |b, w| {
            b.iter(|| black_box(evolve(w, 1e-2, &ForceSpec::None, 0.01, 1e-3, 10).unwrap()))
        });
    }
    g.finish();
}

fn functionals(c: &mut Criterion) {
    let w = vorticity(256);
    let k = BallKernel::new(w.grid(), 0.1).unwrap();
    let mut g = c.benchmark_group("snapshot_functionals");
    g.sample_size(10);
    g.bench_function("256", |b| b.iter(|| black_box(analyze_snapshot(&w, &k, None).unwrap())));
    g.finish();
}

criterion_group!(benches, fft, velocity, ball, step, functionals);
criterion_main!(benches);
