use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use fama_core::montecarlo::Method;
use fama_core::sweep::{Axis, Estimator};
use fama_core::{make_geometry, run_sweep, Execution, FamaScenario, McRun, SweepSpec};

fn monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("monte_carlo");
    let trials = 1 << 18;
    group.throughput(Throughput::Elements(trials));
    group.sample_size(10);
    for &n in &[8usize, 32] {
        let s = FamaScenario::identical_users(make_geometry(n, 2.0).unwrap(), 5, 10.0).unwrap();
        for exec in [Execution::Serial, Execution::Parallel] {
            let run = McRun::new(trials, 7).execution(exec);
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), n), &s, |b, s| {
                b.iter(|| run.outage(s).unwrap())
            });
        }
    }
    group.finish();
}

fn sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep_bound_i");
    group.sample_size(10);
    for exec in [Execution::Serial, Execution::Parallel] {
        let spec = SweepSpec {
            axis: Axis::NPorts,
            values: (1..=16).map(|k| (10 * k) as f64).collect(),
            methods: vec![Estimator::Outage(Method::BoundI)],
            execution: exec,
            ..SweepSpec::default()
        };
        group.bench_function(format!("{exec:?}"), |b| b.iter(|| run_sweep(&spec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, monte_carlo, sweeps);
criterion_main!(benches);
