//! Ensemble throughput on the generic qubit model, sequential against parallel.

#[path = "../tests/common/mod.rs"]
mod common;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qtraj_core::algebra::Flooring;
use qtraj_core::dynamics::{solve_master, Mode, TimeGrid};
use qtraj_core::ensemble::{Execution, RunConfig};
use qtraj_core::information::run_info;

fn ensemble(c: &mut Criterion) {
    let model = common::generic_qubit();
    let master = solve_master(&model, TimeGrid::new(0.2, 1e-3).unwrap()).unwrap();
    let mut group = c.benchmark_group("info_run");
    group.sample_size(10);
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        for n_traj in [256, 1024] {
            let config = RunConfig { n_traj, master_seed: 1, grid: master.grid, mode: Mode::Nonlinear, snapshot_stride: 10 };
            group.bench_with_input(BenchmarkId::new(name, n_traj), &config, |b, config| {
                b.iter(|| run_info(&model, &master, config, exec, Flooring::Enabled).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, ensemble);
criterion_main!(benches);
