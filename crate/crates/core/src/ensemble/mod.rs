//! Reproducible Monte Carlo over independent trajectories.
//!
//! Trajectories advance in lockstep: all of them take `snapshot_stride` grid
//! steps (in parallel when enabled), then an [`EnsembleSnapshot`] of the whole
//! ensemble is handed to a visitor. Memory stays `O(n_traj)` and every
//! reduction runs over trajectories in ascending stream order, so results do
//! not depend on the number of workers.

mod stats;

pub use stats::{mean_state, reduce_snapshot, sample_stats, SampleStats, SnapshotReduction};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{MasterSolution, Mode, TimeGrid, Trajectory};
use crate::information::EnsembleSnapshot;
use crate::model::MeasurementModel;
use crate::{Error, Result};

/// Identifies the noise stream of one trajectory.
///
/// The stream is ChaCha8 keyed by `seed_from_u64(master_seed)` with its
/// 64-bit stream selector set to `stream_index`. Each step consumes, in
/// order, one standard normal per diffusive channel (Ziggurat sampler of
/// `rand_distr`) and one `[0, 1)` uniform per jump channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStreamSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStreamSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self { master_seed, stream_index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Parameters of one ensemble run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n_traj: usize,
    pub master_seed: u64,
    pub grid: TimeGrid,
    pub mode: Mode,
    /// Grid steps between snapshots.
    pub snapshot_stride: usize,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_traj < 2 {
            return Err(Error::InvalidConfig(format!("n_traj = {} but at least 2 trajectories are needed", self.n_traj)));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidConfig("snapshot stride must be positive".into()));
        }
        if !self.grid.n_steps().is_multiple_of(self.snapshot_stride) {
            return Err(Error::InvalidConfig(format!(
                "snapshot stride {} does not divide the {} grid steps",
                self.snapshot_stride,
                self.grid.n_steps()
            )));
        }
        Ok(())
    }
}

/// How trajectories are scheduled onto threads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Data-parallel over trajectories; `threads = 0` uses the global pool.
    /// Without the `parallel` feature this runs sequentially.
    #[default]
    Parallel,
    ParallelWith {
        threads: usize,
    },
}

impl Execution {
    /// Worker count as given on a command line: `1` is sequential, `0` the default pool.
    pub fn from_threads(threads: usize) -> Self {
        match threads {
            0 => Execution::Parallel,
            1 => Execution::Sequential,
            n => Execution::ParallelWith { threads: n },
        }
    }
}

/// Resolved scheduling for one run; a dedicated pool is built once.
enum Scheduler {
    Sequential,
    #[cfg(feature = "parallel")]
    Global,
    #[cfg(feature = "parallel")]
    Pool(rayon::ThreadPool),
}

impl Scheduler {
    fn new(exec: Execution) -> Result<Self> {
        Ok(match exec {
            Execution::Sequential => Scheduler::Sequential,
            #[cfg(feature = "parallel")]
            Execution::Parallel => Scheduler::Global,
            #[cfg(feature = "parallel")]
            Execution::ParallelWith { threads } => Scheduler::Pool(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| Error::InvalidConfig(format!("cannot start {threads} workers: {e}")))?,
            ),
            #[cfg(not(feature = "parallel"))]
            Execution::Parallel | Execution::ParallelWith { .. } => Scheduler::Sequential,
        })
    }

    fn advance_all(&self, trajs: &mut [Trajectory], model: &MeasurementModel, master: &MasterSolution, steps: usize) -> Result<()> {
        let results: Vec<Result<()>> = match self {
            Scheduler::Sequential => trajs.iter_mut().map(|t| t.advance(model, master, steps)).collect(),
            #[cfg(feature = "parallel")]
            Scheduler::Global => {
                use rayon::prelude::*;
                trajs.par_iter_mut().map(|t| t.advance(model, master, steps)).collect()
            }
            #[cfg(feature = "parallel")]
            Scheduler::Pool(pool) => {
                use rayon::prelude::*;
                pool.install(|| trajs.par_iter_mut().map(|t| t.advance(model, master, steps)).collect())
            }
        };
        // lowest failing stream wins, independent of scheduling
        results.into_iter().collect()
    }
}

fn snapshot(trajs: &[Trajectory]) -> EnsembleSnapshot {
    let first = &trajs[0].state;
    EnsembleSnapshot { t: first.t, step: first.step, samples: trajs.iter().map(|t| t.state.clone()).collect() }
}

/// Runs `config.n_traj` trajectories on the master solution's grid and calls
/// `visit` with the ensemble at `t = 0` and after every `snapshot_stride`
/// steps. The first error (by stream index) aborts the run.
pub fn run_ensemble<F>(model: &MeasurementModel, master: &MasterSolution, config: &RunConfig, exec: Execution, mut visit: F) -> Result<()>
where
    F: FnMut(&EnsembleSnapshot) -> Result<()>,
{
    config.validate()?;
    if config.grid != master.grid {
        return Err(Error::InvalidConfig("run grid differs from the master-equation grid".into()));
    }
    let scheduler = Scheduler::new(exec)?;
    let mut trajs = (0..config.n_traj as u64)
        .map(|i| Trajectory::new(model, config.mode, RngStreamSpec::new(config.master_seed, i)))
        .collect::<Result<Vec<_>>>()?;
    visit(&snapshot(&trajs))?;
    let n_steps = config.grid.n_steps();
    let mut step = 0;
    while step < n_steps {
        scheduler.advance_all(&mut trajs, model, master, config.snapshot_stride)?;
        step += config.snapshot_stride;
        visit(&snapshot(&trajs))?;
    }
    Ok(())
}

/// All snapshots of a run, in time order.
pub fn collect_snapshots(model: &MeasurementModel, master: &MasterSolution, config: &RunConfig, exec: Execution) -> Result<Vec<EnsembleSnapshot>> {
    let mut out = Vec::with_capacity(config.grid.n_steps() / config.snapshot_stride.max(1) + 1);
    run_ensemble(model, master, config, exec, |s| {
        out.push(s.clone());
        Ok(())
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Operator;
    use crate::dynamics::solve_master;
    use crate::model::JumpChannel;
    use rand::Rng;

    fn model() -> MeasurementModel {
        MeasurementModel::autonomous(
            Operator::from_diagonal(&[0.5, 0.5]),
            1.0,
            Operator::pauli_x(),
            vec![],
            vec![Operator::pauli_z().scale(0.5)],
            vec![JumpChannel::new(vec![Operator::sigma_minus()], 1.0).unwrap()],
        )
        .unwrap()
    }

    fn config(grid: TimeGrid, n_traj: usize) -> RunConfig {
        RunConfig { n_traj, master_seed: 11, grid, mode: Mode::Nonlinear, snapshot_stride: 5 }
    }

    #[test]
    fn config_checks() {
        let grid = TimeGrid::new(1.0, 0.01).unwrap();
        assert!(config(grid, 1).validate().is_err());
        assert!(RunConfig { snapshot_stride: 7, ..config(grid, 2) }.validate().is_err());
        assert!(config(grid, 2).validate().is_ok());
    }

    #[test]
    fn trivial_model_gives_identical_paths() {
        let model = MeasurementModel::autonomous(Operator::from_diagonal(&[0.5, 0.5]), 1.0, Operator::pauli_x(), vec![], vec![], vec![]).unwrap();
        let grid = TimeGrid::new(1.0, 0.01).unwrap();
        let master = solve_master(&model, grid).unwrap();
        let snaps = collect_snapshots(&model, &master, &config(grid, 2), Execution::Sequential).unwrap();
        assert_eq!(snaps.len(), 21);
        for s in &snaps {
            assert_eq!(s.samples[0], s.samples[1]);
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let model = model();
        let grid = TimeGrid::new(0.5, 0.01).unwrap();
        let master = solve_master(&model, grid).unwrap();
        let cfg = config(grid, 16);
        let a = collect_snapshots(&model, &master, &cfg, Execution::Sequential).unwrap();
        for exec in [Execution::Parallel, Execution::ParallelWith { threads: 3 }] {
            assert_eq!(a, collect_snapshots(&model, &master, &cfg, exec).unwrap());
        }
        assert!(a.iter().all(|s| s.samples.len() == 16));
    }

    #[test]
    fn streams_are_uncorrelated() {
        let n = 100_000;
        let mut a = RngStreamSpec::new(5, 0).rng();
        let mut b = RngStreamSpec::new(5, 1).rng();
        let mut acc = 0.0;
        for _ in 0..n {
            let x: f64 = a.sample(rand_distr::StandardNormal);
            let y: f64 = b.sample(rand_distr::StandardNormal);
            acc += x * y;
        }
        assert!((acc / n as f64).abs() < 4.0 / (n as f64).sqrt());
    }
}
