//! Information measures estimated from an ensemble of a posteriori states:
//! the classical information gain `S_c(p_t‖q_t)` and its rate, the quantum
//! mutual entropy `E[S_q(ρ_t‖η_t)] = S_q(η_t) − E[S_q(ρ_t)]`, the total
//! mutual entropy, and the upper bound on `dS_c/dt` with its gap.

mod estimators;
mod production;
mod series;

pub use estimators::{
    bound_estimates, bound_gap, bound_rhs, evaluate_snapshot, info_gain_rate, quantum_mutual, rate_breakdown, BoundEstimate, RateEstimate,
    SnapshotEvaluation,
};
pub use production::{purification_rate, ProductionTerms};
pub use series::{classical_info_gain, classical_info_gain_between, goodness_indexes, run_info, InfoAccumulator, InfoRecord, InfoSeries};

use serde::{Deserialize, Serialize};

use crate::algebra::DensityMatrix;
use crate::dynamics::TrajectoryState;
use crate::ensemble::sample_stats;
use crate::model::MeasurementModel;
use crate::Result;

/// Stabilizer below which `S_q(η_t)` makes the goodness ratio undefined.
pub const INDEX_FLOOR: f64 = 1e-9;

/// A Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn new(value: f64, stderr: f64) -> Self {
        Self { value, stderr }
    }

    /// Sample mean with standard error `s/√N`.
    pub fn mean_of(samples: &[f64]) -> Result<Self> {
        let s = sample_stats(samples)?;
        Ok(Self { value: s.mean, stderr: s.stderr })
    }
}

/// All trajectories of an ensemble at one grid time.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSnapshot {
    pub t: f64,
    /// Grid index of `t`.
    pub step: usize,
    /// Trajectory states in ascending stream order.
    pub samples: Vec<TrajectoryState>,
}

impl EnsembleSnapshot {
    /// A snapshot built from bare states, with `m`, `μ` evaluated from the
    /// model and zero log-densities.
    pub fn from_states(model: &MeasurementModel, t: f64, step: usize, states: Vec<DensityMatrix>) -> Result<Self> {
        let samples = states.into_iter().map(|rho| TrajectoryState::start(model, t, step, rho)).collect::<Result<_>>()?;
        Ok(Self { t, step, samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn states(&self) -> impl Iterator<Item = &DensityMatrix> {
        self.samples.iter().map(|s| &s.rho)
    }

    pub fn m_samples(&self, j: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.m[j]).collect()
    }

    pub fn mu_samples(&self, k: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.mu[k]).collect()
    }

    /// `ln p_t − ln q_t` per trajectory.
    pub fn log_ratio_samples(&self) -> Vec<f64> {
        self.samples.iter().map(TrajectoryState::log_ratio).collect()
    }
}
