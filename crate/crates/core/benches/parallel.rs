use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use nwidth::experiments::{family_gram, family_snapshots, run_sweep_with};
use nwidth::geometry::assemble_gram_with;
use nwidth::widths::minimax_width_with;
use nwidth::{Execution, Family, MinimaxConfig};

const POLICIES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn gram_assembly(c: &mut Criterion) {
    let snaps = family_snapshots(Family::Wave, 257).unwrap();
    let mut group = c.benchmark_group("gram_wave_257");
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| assemble_gram_with(black_box(&snaps), exec).unwrap())
        });
    }
    group.finish();
}

fn minimax(c: &mut Criterion) {
    let gram = family_gram(Family::Wave, 17, Execution::Sequential).unwrap();
    let cfg = MinimaxConfig {
        max_iterations: 100,
        ..MinimaxConfig::default()
    };
    let mut group = c.benchmark_group("minimax_wave_17_n4");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| minimax_width_with(black_box(&gram), 4, &cfg, exec).unwrap())
        });
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let cfg = MinimaxConfig {
        restarts: 4,
        max_iterations: 100,
        ..MinimaxConfig::default()
    };
    let mut group = c.benchmark_group("sweep_smooth_17");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_sweep_with(Family::Smooth, 17, &[1, 2, 3, 4], &cfg, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, gram_assembly, minimax, sweep);
criterion_main!(benches);
