use serde::{Deserialize, Serialize};

use super::MasterSolution;
use crate::model::MeasurementModel;
use crate::{Error, Result};

/// Guard on `dt · max λ_k`.
const RATE_GUARD: f64 = 0.1;
/// Guard on `dt · max ν_k(t)`.
const INTENSITY_GUARD: f64 = 0.2;

/// Uniform grid `t_i = i · dt` on `[0, t_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_max: f64,
    dt: f64,
    n_steps: usize,
}

impl TimeGrid {
    /// Requires `t_max / dt` to be an integer up to rounding.
    pub fn new(t_max: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidGrid(format!("dt = {dt} must be positive and finite")));
        }
        if !(t_max >= 0.0 && t_max.is_finite()) {
            return Err(Error::InvalidGrid(format!("t_max = {t_max} must be nonnegative and finite")));
        }
        let steps = (t_max / dt).round();
        if (steps * dt - t_max).abs() > 1e-9 * t_max.max(1.0) {
            return Err(Error::InvalidGrid(format!("t_max = {t_max} is not an integer multiple of dt = {dt}")));
        }
        Ok(Self { t_max, dt, n_steps: steps as usize })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// `t_i`, exact at both ends of the grid.
    pub fn time(&self, i: usize) -> f64 {
        if i == self.n_steps {
            self.t_max
        } else {
            i as f64 * self.dt
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_steps).map(|i| self.time(i))
    }

    /// Human-readable violations of the jump-resolution guards.
    pub fn guard_warnings(&self, model: &MeasurementModel, master: &MasterSolution) -> Vec<String> {
        let mut out = Vec::new();
        let rate = model.max_rate() * self.dt;
        if rate > RATE_GUARD {
            out.push(format!("dt * max rate = {rate:.3} exceeds {RATE_GUARD}"));
        }
        let nu = master.nu.iter().flatten().copied().fold(0.0, f64::max) * self.dt;
        if nu > INTENSITY_GUARD {
            out.push(format!("dt * max nu = {nu:.3} exceeds {INTENSITY_GUARD}"));
        }
        out
    }
}
