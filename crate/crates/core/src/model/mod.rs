//! Measurement models: the operator coefficients of the trajectory equations
//! on a piecewise-constant time schedule.
//!
//! A segment carries a Hamiltonian `H`, unmonitored dissipators `L_l`,
//! diffusive (homodyne-type) channels `R_j` and counting channels, each
//! counting channel being a finite family of operators `V_k^r` together with
//! the reference Poisson intensity `λ_k`. The generator is
//!
//! ```text
//! ℒ[ρ] = −i[H, ρ] + Σ_l D[L_l]ρ + Σ_j D[R_j]ρ + Σ_k (𝒥_k[ρ] − ½{J_k, ρ})
//! ```
//!
//! with `D[A]ρ = AρA† − ½{A†A, ρ}`, `𝒥_k[ρ] = Σ_r V ρ V†` and `J_k = Σ_r V†V`.
//! Units have `ħ = 1`.

mod file;
mod validate;

pub use file::{ChannelFile, MatrixJson, ModelFile, SegmentFile};
pub use validate::{validate, Diagnostic, DiagnosticKind};

use crate::algebra::{DensityMatrix, Operator, C64};
use crate::{Error, Result};

/// Slack used when comparing times against segment boundaries.
pub(crate) const TIME_EPS: f64 = 1e-12;

/// A counting channel: Kraus-like operators `V_k^r` and reference rate `λ_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpChannel {
    kraus_ops: Vec<Operator>,
    rate: f64,
    intensity_op: Operator,
}

impl JumpChannel {
    pub fn new(kraus_ops: Vec<Operator>, rate: f64) -> Result<Self> {
        let dim = kraus_ops.first().map(Operator::dim).ok_or_else(|| Error::InvalidConfig("jump channel without operators".into()))?;
        let mut intensity = Operator::zeros(dim);
        for v in &kraus_ops {
            if v.dim() != dim {
                return Err(Error::DimMismatch { expected: dim, found: v.dim() });
            }
            intensity += &(&v.adjoint() * v);
        }
        Ok(Self { kraus_ops, rate, intensity_op: intensity })
    }

    pub fn kraus_ops(&self) -> &[Operator] {
        &self.kraus_ops
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// `J_k = Σ_r V†V`.
    pub fn intensity_operator(&self) -> &Operator {
        &self.intensity_op
    }

    pub fn dim(&self) -> usize {
        self.intensity_op.dim()
    }

    /// `𝒥_k[ρ] = Σ_r V ρ V†`.
    pub fn jump_map(&self, rho: &Operator) -> Result<Operator> {
        if rho.dim() != self.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), found: rho.dim() });
        }
        Ok(self.apply(rho))
    }

    pub(crate) fn apply(&self, rho: &Operator) -> Operator {
        let mut out = self.kraus_ops[0].sandwich(rho);
        for v in &self.kraus_ops[1..] {
            out += &v.sandwich(rho);
        }
        out
    }

    /// Intensity `Tr{J_k ρ}`.
    pub fn intensity(&self, rho: &Operator) -> f64 {
        self.intensity_op.trace_product(rho).re
    }
}

/// `𝒥[ρ]` for a channel; see [`JumpChannel::jump_map`].
pub fn jump_map(channel: &JumpChannel, rho: &Operator) -> Result<Operator> {
    channel.jump_map(rho)
}

/// The constant coefficients on one interval `(t_start, t_end]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSegment {
    pub t_start: f64,
    pub t_end: f64,
    hamiltonian: Operator,
    lindblad_ops: Vec<Operator>,
    diffusive_ops: Vec<Operator>,
    jump_channels: Vec<JumpChannel>,
    // derived
    effective: Operator,
    effective_adj: Operator,
    lindblad_adj: Vec<Operator>,
    diffusive_adj: Vec<Operator>,
    quadratures: Vec<Operator>,
}

impl ModelSegment {
    pub fn new(
        t_start: f64,
        t_end: f64,
        hamiltonian: Operator,
        lindblad_ops: Vec<Operator>,
        diffusive_ops: Vec<Operator>,
        jump_channels: Vec<JumpChannel>,
    ) -> Result<Self> {
        let dim = hamiltonian.dim();
        let dims = lindblad_ops.iter().chain(&diffusive_ops).map(Operator::dim).chain(jump_channels.iter().map(JumpChannel::dim));
        for d in dims {
            if d != dim {
                return Err(Error::DimMismatch { expected: dim, found: d });
            }
        }
        let lindblad_adj: Vec<Operator> = lindblad_ops.iter().map(Operator::adjoint).collect();
        let diffusive_adj: Vec<Operator> = diffusive_ops.iter().map(Operator::adjoint).collect();
        let quadratures = diffusive_ops.iter().zip(&diffusive_adj).map(|(r, ra)| r + ra).collect();

        // K = H − (i/2)(Σ L†L + Σ R†R + Σ J_k), so that
        // ℒ[ρ] = −i(Kρ − ρK†) + Σ LρL† + Σ RρR† + Σ 𝒥_k[ρ].
        let mut decay = Operator::zeros(dim);
        for (op, adj) in lindblad_ops.iter().zip(&lindblad_adj).chain(diffusive_ops.iter().zip(&diffusive_adj)) {
            decay += &(adj * op);
        }
        for ch in &jump_channels {
            decay += ch.intensity_operator();
        }
        let mut effective = hamiltonian.clone();
        effective.add_scaled(C64::new(0.0, -0.5), &decay);

        Ok(Self {
            t_start,
            t_end,
            hamiltonian,
            lindblad_ops,
            diffusive_ops,
            jump_channels,
            effective_adj: effective.adjoint(),
            effective,
            lindblad_adj,
            diffusive_adj,
            quadratures,
        })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn lindblad_ops(&self) -> &[Operator] {
        &self.lindblad_ops
    }

    pub fn diffusive_ops(&self) -> &[Operator] {
        &self.diffusive_ops
    }

    pub fn jump_channels(&self) -> &[JumpChannel] {
        &self.jump_channels
    }

    /// `R_j + R_j†` for every diffusive channel.
    pub fn quadratures(&self) -> &[Operator] {
        &self.quadratures
    }

    /// Conditional means `m_j = Tr{(R_j + R_j†) ρ}`.
    pub fn diffusive_means(&self, rho: &Operator) -> Vec<f64> {
        self.quadratures.iter().map(|q| q.trace_product(rho).re).collect()
    }

    /// Intensities `μ_k = Tr{J_k ρ}`, clamped at zero.
    pub fn jump_intensities(&self, rho: &Operator) -> Vec<f64> {
        self.jump_channels.iter().map(|c| c.intensity(rho).max(0.0)).collect()
    }

    /// `−i(Kρ − ρK†) + Σ LρL† + Σ RρR†`: the generator without the jump
    /// feeding terms `𝒥_k[ρ]`.
    pub(crate) fn no_jump_generator(&self, rho: &Operator) -> Operator {
        let mut out = &(&(&self.effective * rho) - &(rho * &self.effective_adj)) * C64::new(0.0, -1.0);
        for (op, adj) in self.lindblad_ops.iter().zip(&self.lindblad_adj).chain(self.diffusive_ops.iter().zip(&self.diffusive_adj)) {
            out += &(&(op * rho) * adj);
        }
        out
    }

    /// `ℒ[ρ]` for this segment's coefficients.
    pub fn generator(&self, rho: &Operator) -> Operator {
        let mut out = self.no_jump_generator(rho);
        for ch in &self.jump_channels {
            out += &ch.apply(rho);
        }
        out
    }
}

/// A full measurement model: contiguous segments covering `[0, horizon]` and
/// the initial state `σ₀ = η₀ = ρ₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementModel {
    dim: usize,
    initial_state: Operator,
    segments: Vec<ModelSegment>,
}

impl MeasurementModel {
    /// Assembles a model, checking only dimensional consistency; semantic
    /// invariants are reported by [`validate`].
    pub fn new(initial_state: Operator, segments: Vec<ModelSegment>) -> Result<Self> {
        let dim = initial_state.dim();
        if segments.is_empty() {
            return Err(Error::InvalidConfig("model has no segments".into()));
        }
        if let Some(s) = segments.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimMismatch { expected: dim, found: s.dim() });
        }
        Ok(Self { dim, initial_state, segments })
    }

    /// A single autonomous segment on `[0, horizon]`.
    pub fn autonomous(
        initial_state: Operator,
        horizon: f64,
        hamiltonian: Operator,
        lindblad_ops: Vec<Operator>,
        diffusive_ops: Vec<Operator>,
        jump_channels: Vec<JumpChannel>,
    ) -> Result<Self> {
        let seg = ModelSegment::new(0.0, horizon, hamiltonian, lindblad_ops, diffusive_ops, jump_channels)?;
        Self::new(initial_state, vec![seg])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn initial_state(&self) -> &Operator {
        &self.initial_state
    }

    pub fn segments(&self) -> &[ModelSegment] {
        &self.segments
    }

    pub fn horizon(&self) -> f64 {
        self.segments.last().map(|s| s.t_end).unwrap_or(0.0)
    }

    pub fn n_diffusive(&self) -> usize {
        self.segments[0].diffusive_ops.len()
    }

    pub fn n_jump(&self) -> usize {
        self.segments[0].jump_channels.len()
    }

    /// Largest reference rate `λ_k` over all segments.
    pub fn max_rate(&self) -> f64 {
        self.segments.iter().flat_map(|s| s.jump_channels.iter().map(JumpChannel::rate)).fold(0.0, f64::max)
    }

    /// Validated normalized initial state.
    pub fn initial_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.initial_state.clone())
    }

    /// Replaces the initial state.
    pub fn with_initial_state(mut self, state: Operator) -> Result<Self> {
        if state.dim() != self.dim {
            return Err(Error::DimMismatch { expected: self.dim, found: state.dim() });
        }
        self.initial_state = state;
        Ok(self)
    }

    fn check_horizon(&self, t: f64) -> Result<()> {
        let horizon = self.horizon();
        if !(t >= -TIME_EPS && t <= horizon + TIME_EPS) {
            return Err(Error::OutOfHorizon { t, horizon });
        }
        Ok(())
    }

    /// Left-continuous coefficients at `t`: the segment with `t_start < t ≤ t_end`
    /// (the first segment at `t = 0`).
    pub fn segment_at(&self, t: f64) -> Result<&ModelSegment> {
        self.check_horizon(t)?;
        Ok(self.segments.iter().find(|s| t <= s.t_end + TIME_EPS).unwrap_or_else(|| self.segments.last().unwrap()))
    }

    /// Coefficients governing the interval just after `t` (right limit): the
    /// segment with `t_start ≤ t < t_end`, or the last segment at the horizon.
    pub fn segment_after(&self, t: f64) -> Result<&ModelSegment> {
        self.check_horizon(t)?;
        Ok(self.segments.iter().find(|s| t < s.t_end - TIME_EPS).unwrap_or_else(|| self.segments.last().unwrap()))
    }
}

/// `ℒ(t)[ρ]` with the left-continuous coefficients at `t`.
pub fn liouvillian_apply(model: &MeasurementModel, t: f64, rho: &Operator) -> Result<Operator> {
    if rho.dim() != model.dim() {
        return Err(Error::DimMismatch { expected: model.dim(), found: rho.dim() });
    }
    Ok(model.segment_at(t)?.generator(rho))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plus_state() -> Operator {
        Operator::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap()
    }

    #[test]
    fn jump_map_examples() {
        let rho = Operator::from_diagonal(&[0.25, 0.75]);
        let id = JumpChannel::new(vec![Operator::identity(2)], 1.0).unwrap();
        assert_eq!(jump_map(&id, &rho).unwrap(), rho);

        let decay = JumpChannel::new(vec![Operator::sigma_minus()], 1.0).unwrap();
        let out = jump_map(&decay, &Operator::from_diagonal(&[1.0, 0.0])).unwrap();
        assert_eq!(out, Operator::from_diagonal(&[0.0, 1.0]));

        let flip = JumpChannel::new(vec![Operator::pauli_x()], 1.0).unwrap();
        assert_eq!(jump_map(&flip, &rho).unwrap(), Operator::from_diagonal(&[0.75, 0.25]));

        assert!(matches!(jump_map(&flip, &Operator::identity(3)), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn zero_model_generator_vanishes() {
        let model = MeasurementModel::autonomous(plus_state(), 1.0, Operator::zeros(2), vec![], vec![], vec![]).unwrap();
        let out = liouvillian_apply(&model, 0.5, &plus_state()).unwrap();
        assert_eq!(out.max_abs(), 0.0);
    }

    #[test]
    fn hamiltonian_commutator() {
        let h = Operator::pauli_z().scale(0.5);
        let model = MeasurementModel::autonomous(plus_state(), 1.0, h, vec![], vec![], vec![]).unwrap();
        let out = liouvillian_apply(&model, 0.0, &plus_state()).unwrap();
        // −i[σz/2, |+⟩⟨+|] = [[0, −i/2], [i/2, 0]]
        assert!((out.get(0, 1) - C64::new(0.0, -0.5)).norm() < 1e-15);
        assert!((out.get(1, 0) - C64::new(0.0, 0.5)).norm() < 1e-15);
        assert!(out.get(0, 0).norm() < 1e-15 && out.get(1, 1).norm() < 1e-15);
    }

    #[test]
    fn generator_is_trace_free() {
        let sm = Operator::sigma_minus();
        let model = MeasurementModel::autonomous(
            plus_state(),
            1.0,
            Operator::pauli_x(),
            vec![Operator::pauli_z().scale(0.3)],
            vec![Operator::pauli_y().scale(0.7)],
            vec![JumpChannel::new(vec![sm.clone(), sm.adjoint().scale(0.2)], 1.0).unwrap()],
        )
        .unwrap();
        let rho = Operator::from_rows(&[vec![C64::new(0.3, 0.0), C64::new(0.1, 0.2)], vec![C64::new(0.4, -0.3), C64::new(-0.5, 0.1)]]).unwrap();
        assert!(liouvillian_apply(&model, 0.2, &rho).unwrap().trace().norm() < 1e-14);
    }

    #[test]
    fn out_of_horizon() {
        let model = MeasurementModel::autonomous(plus_state(), 1.0, Operator::zeros(2), vec![], vec![], vec![]).unwrap();
        assert!(matches!(liouvillian_apply(&model, 1.5, &plus_state()), Err(Error::OutOfHorizon { .. })));
    }

    #[test]
    fn segment_lookup_conventions() {
        let s1 = ModelSegment::new(0.0, 1.0, Operator::zeros(2), vec![], vec![], vec![]).unwrap();
        let s2 = ModelSegment::new(1.0, 2.0, Operator::pauli_z(), vec![], vec![], vec![]).unwrap();
        let model = MeasurementModel::new(plus_state(), vec![s1, s2]).unwrap();
        assert_eq!(model.segment_at(1.0).unwrap().t_start, 0.0);
        assert_eq!(model.segment_after(1.0).unwrap().t_start, 1.0);
        assert_eq!(model.segment_after(2.0).unwrap().t_start, 1.0);
        assert_eq!(model.segment_at(0.0).unwrap().t_start, 0.0);
    }
}
