use criterion::{criterion_group, criterion_main, Criterion};

use treefair::exec::Execution;
use treefair::harness::{run_sweep, SweepMode, SweepSpec};

fn sweep(c: &mut Criterion) {
    let spec = SweepSpec::new(3, 1, 6).with_k_range(1, 3);
    let mut group = c.benchmark_group("sweep d=3 k=1..3 n_max=6");
    group.sample_size(20);
    for (name, execution) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_function(name, |b| {
            b.iter(|| run_sweep(&spec, SweepMode::Both, execution).unwrap())
        });
    }
    group.finish();

    let spec = SweepSpec::new(4, 2, 6);
    let mut group = c.benchmark_group("cross-validate d=4 k=2 n_max=6");
    group.sample_size(10);
    for (name, execution) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_function(name, |b| {
            b.iter(|| run_sweep(&spec, SweepMode::CrossValidate, execution).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sweep);
criterion_main!(benches);
