use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use unext::experiment::{compute_rows, Axis, ExperimentConfig, ExperimentKind};
use unext::Execution;

fn iso_sweep() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(ExperimentKind::IsoOneshot);
    cfg.grid.f = Some(Axis::Range { start: 0.6, stop: 1.0, step: 0.02 });
    cfg.grid.epsilon = Some(Axis::List(vec![0.05]));
    cfg
}

fn erasure_sweep() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(ExperimentKind::ErasureOneshot);
    cfg.grid.p = Some(Axis::Range { start: 0.0, stop: 0.5, step: 0.05 });
    cfg.grid.d = Some(Axis::List(vec![2]));
    cfg
}

fn sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (name, base) in [("iso-oneshot", iso_sweep()), ("erasure-oneshot", erasure_sweep())] {
        for exec in [Execution::Sequential, Execution::Parallel] {
            let mut cfg = base.clone();
            cfg.execution = exec;
            let label = format!("{exec:?}").to_lowercase();
            group.bench_with_input(BenchmarkId::new(name, label), &cfg, |b, cfg| {
                b.iter(|| black_box(compute_rows(cfg).unwrap()))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
