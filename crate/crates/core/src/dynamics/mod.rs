//! Time integration: the master equation for the a priori state `η_t`, the
//! nonlinear trajectory equation for `ρ_t` under the physical law, the linear
//! equation for `σ_t` under the reference measure, and the pathwise
//! log-densities `ln p_t` and `ln q_t`.

mod grid;
mod master;
mod step;
mod trajectory;

pub use grid::TimeGrid;
pub use master::{solve_master, MasterSolution};
pub use step::{accumulate_log_densities, step_linear, step_nonlinear, LogDensityIncrement};
pub use trajectory::{simulate_trajectory, Trajectory};

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::DensityMatrix;
use crate::model::MeasurementModel;
use crate::{Error, Result};

/// Intensities below this are treated as zero in logarithms.
pub const INTENSITY_FLOOR: f64 = 1e-12;
/// `ln p` below which the linear solution is considered collapsed.
pub const LOG_P_FLOOR: f64 = -690.0;
/// Largest tolerated positivity clipping per master-equation step, in trace norm.
pub const MAX_CLIP: f64 = 1e-6;
/// Largest tolerated positivity clipping per trajectory step. Euler steps
/// from nearly pure states overshoot the boundary by `O(dt)`, so this only
/// catches steps that are far too coarse.
pub const MAX_CLIP_TRAJECTORY: f64 = 0.1;

/// Which trajectory equation is integrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Linear equation for `σ_t` under the reference measure `Q`.
    Linear,
    /// Nonlinear equation for `ρ_t` under the physical law.
    Nonlinear,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Linear => "linear",
            Mode::Nonlinear => "nonlinear",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Mode::Linear),
            "nonlinear" => Ok(Mode::Nonlinear),
            other => Err(Error::InvalidConfig(format!("unknown mode {other:?} (expected linear or nonlinear)"))),
        }
    }
}

/// Mean-field output moments `n_j(t)` and `ν_k(t)` at one grid time.
#[derive(Clone, Copy, Debug)]
pub struct ReferenceMeans<'a> {
    pub n: &'a [f64],
    pub nu: &'a [f64],
}

/// Noise for one step: Wiener increments and per-channel jump indicators.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NoiseDraw {
    /// Increments with variance `dt`: the innovation `dŴ_j` in nonlinear
    /// mode, the reference-measure `dW_j` in linear mode.
    pub dw: Vec<f64>,
    pub jumps: Vec<bool>,
}

impl NoiseDraw {
    pub fn new(n_diffusive: usize, n_jump: usize) -> Self {
        Self { dw: vec![0.0; n_diffusive], jumps: vec![false; n_jump] }
    }

    /// Redraws in place: first one standard normal per diffusive channel,
    /// then one uniform per jump channel, which fires when below
    /// `min(rate_k dt, 1)`.
    pub fn redraw<R: Rng + ?Sized>(&mut self, rng: &mut R, dt: f64, jump_rates: &[f64]) {
        let sd = dt.sqrt();
        for w in &mut self.dw {
            let z: f64 = rng.sample(StandardNormal);
            *w = z * sd;
        }
        for (flag, &rate) in self.jumps.iter_mut().zip(jump_rates) {
            let u: f64 = rng.random();
            *flag = u < (rate * dt).min(1.0);
        }
    }

    pub fn any_jump(&self) -> bool {
        self.jumps.iter().any(|&j| j)
    }
}

/// Running record of one trajectory at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryState {
    pub t: f64,
    /// Number of steps taken.
    pub step: usize,
    /// A posteriori state `ρ_t` (normalized `σ_t` in linear mode).
    pub rho: DensityMatrix,
    pub log_p: f64,
    pub log_q: f64,
    /// Output processes `W_j(t)`.
    pub w: Vec<f64>,
    /// Counts `N_k(t)`.
    pub counts: Vec<u64>,
    /// `m_j = Tr{(R_j + R_j†) ρ_t}` with the coefficients just after `t`.
    pub m: Vec<f64>,
    /// `μ_k = Tr{J_k ρ_t}` with the coefficients just after `t`.
    pub mu: Vec<f64>,
    /// Smallest eigenvalue seen before any positivity clipping.
    pub min_eigenvalue: f64,
}

impl TrajectoryState {
    /// Starts a trajectory from `rho` at time `t`, after `step` steps.
    pub fn start(model: &MeasurementModel, t: f64, step: usize, rho: DensityMatrix) -> Result<Self> {
        if rho.dim() != model.dim() {
            return Err(Error::DimMismatch { expected: model.dim(), found: rho.dim() });
        }
        let seg = model.segment_after(t)?;
        let m = seg.diffusive_means(rho.as_operator());
        let mu = seg.jump_intensities(rho.as_operator());
        Ok(Self {
            t,
            step,
            rho,
            log_p: 0.0,
            log_q: 0.0,
            w: vec![0.0; model.n_diffusive()],
            counts: vec![0; model.n_jump()],
            m,
            mu,
            min_eigenvalue: f64::INFINITY,
        })
    }

    /// The state at `t = 0` with `ρ₀` taken from the model.
    pub fn initial(model: &MeasurementModel) -> Result<Self> {
        Self::start(model, 0.0, 0, model.initial_density()?)
    }

    /// `ln(p_t / q_t)`.
    pub fn log_ratio(&self) -> f64 {
        self.log_p - self.log_q
    }
}
