use super::{ReferenceMeans, TimeGrid, MAX_CLIP};
use crate::algebra::{DensityMatrix, Operator};
use crate::model::{MeasurementModel, ModelSegment};
use crate::{Error, Result};

/// The a priori states `η_t` on a grid with the output means they induce.
#[derive(Clone, Debug)]
pub struct MasterSolution {
    pub grid: TimeGrid,
    pub eta: Vec<DensityMatrix>,
    /// `n_j(t_i) = Tr{(R_j + R_j†) η_{t_i}}`.
    pub n: Vec<Vec<f64>>,
    /// `ν_k(t_i) = Tr{J_k η_{t_i}}`.
    pub nu: Vec<Vec<f64>>,
    /// Largest positivity clipping applied in any step.
    pub max_clip: f64,
}

impl MasterSolution {
    pub fn reference(&self, i: usize) -> ReferenceMeans<'_> {
        ReferenceMeans { n: &self.n[i], nu: &self.nu[i] }
    }

    /// Grid index of `t`, if `t` lies on the grid.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let i = (t / self.grid.dt()).round();
        (i >= 0.0 && (i as usize) <= self.grid.n_steps() && (self.grid.time(i as usize) - t).abs() <= 1e-9 * self.grid.dt()).then_some(i as usize)
    }
}

fn rk4_step(seg: &ModelSegment, eta: &Operator, dt: f64) -> Operator {
    let k1 = seg.generator(eta);
    let k2 = seg.generator(&(eta + &(&k1 * (0.5 * dt))));
    let k3 = seg.generator(&(eta + &(&k2 * (0.5 * dt))));
    let k4 = seg.generator(&(eta + &(&k3 * dt)));
    let mut incr = k1;
    incr += &(&k2 * 2.0);
    incr += &(&k3 * 2.0);
    incr += &k4;
    eta + &(&incr * (dt / 6.0))
}

/// Integrates `dη/dt = ℒ(t)[η]` with classical RK4, projecting back onto the
/// state space after each step.
pub fn solve_master(model: &MeasurementModel, grid: TimeGrid) -> Result<MasterSolution> {
    let n_points = grid.n_steps() + 1;
    let mut eta = Vec::with_capacity(n_points);
    let mut n = Vec::with_capacity(n_points);
    let mut nu = Vec::with_capacity(n_points);
    let mut max_clip: f64 = 0.0;
    let mut current = model.initial_density()?;
    for i in 0..n_points {
        let t = grid.time(i);
        let seg = model.segment_after(t)?;
        n.push(seg.diffusive_means(current.as_operator()));
        nu.push(seg.jump_channels().iter().map(|c| c.intensity(current.as_operator())).collect());
        if i + 1 < n_points {
            let next = rk4_step(seg, current.as_operator(), grid.dt());
            let (state, phys) = DensityMatrix::physicalize(&next)?;
            if phys.clipped > 0.0 {
                log::debug!("master equation: clipped {:.3e} at t = {}", phys.clipped, grid.time(i + 1));
            }
            if phys.clipped > MAX_CLIP {
                return Err(Error::NonPhysicalState { t: grid.time(i + 1), clipped: phys.clipped });
            }
            max_clip = max_clip.max(phys.clipped);
            eta.push(std::mem::replace(&mut current, state));
        } else {
            eta.push(current.clone());
        }
    }
    Ok(MasterSolution { grid, eta, n, nu, max_clip })
}
