use rand_chacha::ChaCha8Rng;

use super::{step_linear, step_nonlinear, MasterSolution, Mode, NoiseDraw, TrajectoryState};
use crate::ensemble::RngStreamSpec;
use crate::model::MeasurementModel;
use crate::{Error, Result};

/// One trajectory together with its private noise stream.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub state: TrajectoryState,
    stream: u64,
    mode: Mode,
    rng: ChaCha8Rng,
    draw: NoiseDraw,
    probs: Vec<f64>,
}

impl Trajectory {
    pub fn new(model: &MeasurementModel, mode: Mode, spec: RngStreamSpec) -> Result<Self> {
        Ok(Self {
            state: TrajectoryState::initial(model)?,
            stream: spec.stream_index,
            mode,
            rng: spec.rng(),
            draw: NoiseDraw::new(model.n_diffusive(), model.n_jump()),
            probs: vec![0.0; model.n_jump()],
        })
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Takes up to `n_steps` grid steps, stopping at the end of the grid.
    /// Errors are annotated with the stream index.
    pub fn advance(&mut self, model: &MeasurementModel, master: &MasterSolution, n_steps: usize) -> Result<()> {
        self.advance_inner(model, master, n_steps).map_err(|e| Error::Trajectory { stream: self.stream, source: Box::new(e) })
    }

    fn advance_inner(&mut self, model: &MeasurementModel, master: &MasterSolution, n_steps: usize) -> Result<()> {
        let grid = master.grid;
        let dt = grid.dt();
        let end = (self.state.step + n_steps).min(grid.n_steps());
        while self.state.step < end {
            let i = self.state.step;
            match self.mode {
                Mode::Nonlinear => self.probs.copy_from_slice(&self.state.mu),
                Mode::Linear => {
                    let seg = model.segment_after(self.state.t)?;
                    for (p, ch) in self.probs.iter_mut().zip(seg.jump_channels()) {
                        *p = ch.rate();
                    }
                }
            }
            self.draw.redraw(&mut self.rng, dt, &self.probs);
            let reference = master.reference(i);
            match self.mode {
                Mode::Nonlinear => step_nonlinear(model, reference, &mut self.state, &self.draw, dt)?,
                Mode::Linear => step_linear(model, reference, &mut self.state, &self.draw, dt)?,
            };
            self.state.t = grid.time(self.state.step);
        }
        Ok(())
    }
}

/// Runs one full path on the master solution's grid, returning the state
/// every `stride` steps (always including the first and last grid points).
pub fn simulate_trajectory(
    model: &MeasurementModel,
    master: &MasterSolution,
    mode: Mode,
    spec: RngStreamSpec,
    stride: usize,
) -> Result<Vec<TrajectoryState>> {
    if stride == 0 {
        return Err(Error::InvalidConfig("snapshot stride must be positive".into()));
    }
    let mut traj = Trajectory::new(model, mode, spec)?;
    let n_steps = master.grid.n_steps();
    let mut out = vec![traj.state.clone()];
    while traj.state.step < n_steps {
        traj.advance(model, master, stride)?;
        out.push(traj.state.clone());
    }
    Ok(out)
}
