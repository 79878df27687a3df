use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use mfscale_core::boxcount::{box_count, quantize_points};
use mfscale_core::ldiagram::build_ldiagram;
use mfscale_core::mfdfa::{build_profile, fluctuation_table, MfdfaConfig};
use mfscale_core::surrogate::phase_randomize;
use mfscale_core::synth::gaussian_white;

fn fluctuation(c: &mut Criterion) {
    let mut g = c.benchmark_group("fluctuation_table");
    g.sample_size(10);
    for n in [1usize << 14, 1 << 16] {
        let x = gaussian_white(n, 1);
        let cfg = MfdfaConfig::for_length(n).unwrap();
        let profile = build_profile(&x, cfg.profile_order).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &profile, |b, p| {
            b.iter(|| fluctuation_table(black_box(p), &cfg).unwrap())
        });
    }
    g.finish();
}

fn boxes(c: &mut Criterion) {
    let mut g = c.benchmark_group("box_count");
    for n in [10_000usize, 100_000] {
        let pts = build_ldiagram(&gaussian_white(n + 1, 2), 1).unwrap();
        let grid = quantize_points(&pts, 16).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &grid, |b, grid| {
            b.iter(|| box_count(black_box(grid), 16).unwrap())
        });
    }
    g.finish();
}

fn phase(c: &mut Criterion) {
    let mut g = c.benchmark_group("phase_randomize");
    for n in [1usize << 16, 100_000] {
        let x = gaussian_white(n, 3);
        g.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| {
            b.iter(|| phase_randomize(black_box(x), 4).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, fluctuation, boxes, phase);
criterion_main!(benches);
