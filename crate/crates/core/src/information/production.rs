//! Per-state terms of the derivative bound.
//!
//! For a state `x` and the coefficients of one segment, the purification
//! rate `P(x) = −d/du E[S_q(ρ_u)]` of trajectories started at `x` is
//!
//! ```text
//! P(x) = Σ_k (Tr{𝒥_k[x] ln 𝒥_k[x]} − μ_k ln μ_k − Tr{J_k x ln x})
//!      + Σ_j Tr{R_j x [R_j†, ln x]} + Σ_l Tr{L_l x [L_l†, ln x]}
//!      + ½ Σ_j (I_j(x) − m_j²)
//! ```
//!
//! where `I_j(x) = ∫₀^∞ Tr{B G B G} du` with `B = R_j x + x R_j†` and
//! `G = (u + x)⁻¹`, split into the sandwich and squared resolvent forms.

use nalgebra::DMatrix;

use crate::algebra::{
    eigh, floored_spectrum, pair_sum_in_eigenbasis, trace_x_log_x, EigenSystem, Flooring, Operator, ResolventForm, C64, EIG_FLOOR_BOUND,
};
use crate::dynamics::INTENSITY_FLOOR;
use crate::model::ModelSegment;
use crate::Result;

/// Eigendecomposition of a state with its floored spectrum and logarithms.
pub(crate) struct Spectral {
    es: EigenSystem,
    /// Unfloored eigenvalues, ascending.
    raw: Vec<f64>,
    lambdas: Vec<f64>,
    logs: Vec<f64>,
    /// `U diag(λ) U†` with the floored spectrum.
    state: Operator,
}

impl Spectral {
    pub(crate) fn new(x: &Operator, flooring: Flooring) -> Result<Self> {
        let es = eigh(x)?;
        let lambdas = floored_spectrum(&es.eigenvalues, flooring)?;
        let logs = lambdas.iter().map(|l| l.ln()).collect();
        let state = es.with_spectrum(&lambdas);
        Ok(Self { raw: es.eigenvalues.clone(), es, lambdas, logs, state })
    }

    pub(crate) fn raw_eigenvalues(&self) -> &[f64] {
        &self.raw
    }

    fn basis(&self, a: &Operator) -> DMatrix<C64> {
        self.es.to_eigenbasis(a)
    }

    /// `ln x` as an operator.
    pub(crate) fn log_operator(&self) -> Operator {
        self.es.with_spectrum(&self.logs)
    }

    /// `Tr{A x ln x}`, real part.
    fn trace_with_x_log_x(&self, a: &Operator) -> f64 {
        let at = self.basis(a);
        (0..self.lambdas.len()).map(|i| at[(i, i)].re * self.lambdas[i] * self.logs[i]).sum()
    }

    /// `Tr{A x [A†, ln x]} = Σ_ij |A_ij|² λ_j (ℓ_i − ℓ_j)`.
    fn commutator_term(&self, a: &Operator) -> f64 {
        let at = self.basis(a);
        let n = self.lambdas.len();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += at[(i, j)].norm_sqr() * self.lambdas[j] * (self.logs[i] - self.logs[j]);
            }
        }
        acc
    }

    /// `I(x) = Sandwich(R, R) + Sandwich(R†, R†) + 2 Squared(R, R†)`.
    fn ito_integral(&self, r: &Operator) -> f64 {
        let rt = self.basis(r);
        let rt_adj = rt.adjoint();
        let s1 = pair_sum_in_eigenbasis(&rt, &rt, &self.lambdas, ResolventForm::Sandwich);
        let s2 = pair_sum_in_eigenbasis(&rt_adj, &rt_adj, &self.lambdas, ResolventForm::Sandwich);
        let sq = pair_sum_in_eigenbasis(&rt, &rt_adj, &self.lambdas, ResolventForm::Squared);
        (s1 + s2 + sq * 2.0).re
    }
}

/// `μ ln μ` with `0 ln 0 = 0`.
fn x_ln_x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Breakdown of `P(x)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ProductionTerms {
    pub jump: f64,
    pub diffusive_commutator: f64,
    pub lindblad_commutator: f64,
    /// `½ Σ_j (I_j(x) − m_j²)`.
    pub ito: f64,
}

impl ProductionTerms {
    pub fn total(&self) -> f64 {
        self.jump + self.diffusive_commutator + self.lindblad_commutator + self.ito
    }
}

pub(crate) fn production_terms(seg: &ModelSegment, sx: &Spectral) -> Result<ProductionTerms> {
    let x = &sx.state;
    let mut terms = ProductionTerms::default();
    for ch in seg.jump_channels() {
        let jx = ch.apply(x);
        let mu = ch.intensity(x);
        terms.jump += trace_x_log_x(&jx.hermitian_part())? - x_ln_x(mu) - sx.trace_with_x_log_x(ch.intensity_operator());
    }
    for r in seg.diffusive_ops() {
        terms.diffusive_commutator += sx.commutator_term(r);
        let m = (r + &r.adjoint()).trace_product(x).re;
        terms.ito += 0.5 * (sx.ito_integral(r) - m * m);
    }
    for l in seg.lindblad_ops() {
        terms.lindblad_commutator += sx.commutator_term(l);
    }
    Ok(terms)
}

/// `P(x) = −d/du E[S_q(ρ_u)]` for trajectories started at `x` under `seg`.
pub fn purification_rate(seg: &ModelSegment, x: &Operator, flooring: Flooring) -> Result<ProductionTerms> {
    production_terms(seg, &Spectral::new(x, flooring)?)
}

/// Quantities of the reference state `η` shared by all trajectories.
pub(crate) struct ReferenceTerms {
    pub(crate) spectral: Spectral,
    pub(crate) log_eta: Operator,
    /// `ln 𝒥_k[η]` with eigenvalues floored relative to `ν_k`; `None` when
    /// `ν_k` is below the intensity floor.
    pub(crate) log_jump_eta: Vec<Option<Operator>>,
    pub(crate) production: ProductionTerms,
}

impl ReferenceTerms {
    pub(crate) fn new(seg: &ModelSegment, eta: &Operator, flooring: Flooring) -> Result<Self> {
        let spectral = Spectral::new(eta, flooring)?;
        let production = production_terms(seg, &spectral)?;
        let log_eta = spectral.log_operator();
        let mut log_jump_eta = Vec::with_capacity(seg.jump_channels().len());
        for ch in seg.jump_channels() {
            let jeta = ch.apply(&spectral.state).hermitian_part();
            let nu = jeta.trace().re;
            if nu <= INTENSITY_FLOOR {
                log_jump_eta.push(None);
                continue;
            }
            let es = eigh(&jeta)?;
            let floor = EIG_FLOOR_BOUND * nu;
            log_jump_eta.push(Some(es.map_spectrum(|l| l.max(floor).ln())));
        }
        Ok(Self { spectral, log_eta, log_jump_eta, production })
    }
}

/// Per-trajectory terms of the explicit gap expression: for each jump
/// channel `Tr{Jρ(ln ρ − ln η)} − Tr{𝒥[ρ](ln 𝒥[ρ] − ln 𝒥[η])}`, for each
/// `A ∈ {R_j, L_l}` `Tr{Aρ[A†, ln η]} − Tr{Aρ[A†, ln ρ]}`, and
/// `½ Σ_j (I_j(η) − I_j(ρ))`. Its ensemble mean estimates the gap.
pub(crate) fn direct_gap(seg: &ModelSegment, reference: &ReferenceTerms, sr: &Spectral) -> Result<f64> {
    let rho = &sr.state;
    let mut gap = 0.0;
    for (ch, log_jeta) in seg.jump_channels().iter().zip(&reference.log_jump_eta) {
        let j = ch.intensity_operator();
        gap += sr.trace_with_x_log_x(j) - (j * rho).trace_product(&reference.log_eta).re;
        if let Some(log_jeta) = log_jeta {
            let jrho = ch.apply(rho).hermitian_part();
            gap -= trace_x_log_x(&jrho)? - jrho.trace_product(log_jeta).re;
        }
    }
    let log_eta = &reference.log_eta;
    for a in seg.diffusive_ops().iter().chain(seg.lindblad_ops()) {
        // Tr{Aρ[A†, ln η]} = Tr{AρA† ln η} − Tr{A†Aρ ln η}
        let a_adj = a.adjoint();
        let a_rho = a * rho;
        let with_eta = (&a_rho * &a_adj).trace_product(log_eta) - (&(&a_adj * a) * rho).trace_product(log_eta);
        gap += with_eta.re - sr.commutator_term(a);
    }
    for r in seg.diffusive_ops() {
        gap += 0.5 * (reference.spectral.ito_integral(r) - sr.ito_integral(r));
    }
    Ok(gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::DensityMatrix;
    use crate::model::JumpChannel;

    fn segment(h: Operator, l: Vec<Operator>, r: Vec<Operator>, v: Vec<JumpChannel>) -> ModelSegment {
        ModelSegment::new(0.0, 1.0, h, l, r, v).unwrap()
    }

    #[test]
    fn hamiltonian_only_produces_nothing() {
        let seg = segment(Operator::pauli_x(), vec![], vec![], vec![]);
        let x = Operator::from_real_rows(&[&[0.3, 0.2], &[0.2, 0.7]]).unwrap();
        assert_eq!(purification_rate(&seg, &x, Flooring::Enabled).unwrap().total(), 0.0);
    }

    #[test]
    fn unmonitored_dephasing_matches_entropy_derivative() {
        // −dS/dt = Tr{ℒ[x] ln x} for an unmonitored dissipator
        let l = Operator::pauli_z().scale(0.8);
        let seg = segment(Operator::zeros(2), vec![l], vec![], vec![]);
        let x = Operator::from_rows(&[vec![C64::new(0.6, 0.0), C64::new(0.2, 0.1)], vec![C64::new(0.2, -0.1), C64::new(0.4, 0.0)]]).unwrap();
        let p = purification_rate(&seg, &x, Flooring::Enabled).unwrap().total();
        let log_x = eigh(&x).unwrap().map_spectrum(f64::ln);
        let expected = seg.generator(&x).trace_product(&log_x).re;
        assert!((p - expected).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_homodyne_rate() {
        // At x = I/2 every commutator with ln x vanishes; B = √κ σz and
        // m = 0, so the Itô term is ½ Σ_i |B_ii|² / λ_i = 2κ.
        let kappa: f64 = 0.7;
        let seg = segment(Operator::zeros(2), vec![], vec![Operator::pauli_z().scale(kappa.sqrt())], vec![]);
        let x = DensityMatrix::maximally_mixed(2).into_operator();
        let terms = purification_rate(&seg, &x, Flooring::Enabled).unwrap();
        assert!(terms.diffusive_commutator.abs() < 1e-15);
        assert!((terms.ito - 2.0 * kappa).abs() < 1e-12);
    }

    #[test]
    fn unital_identity_jump_produces_nothing() {
        let ch = JumpChannel::new(vec![Operator::identity(2).scale(1.5)], 2.25).unwrap();
        let seg = segment(Operator::zeros(2), vec![], vec![], vec![ch]);
        let x = Operator::from_real_rows(&[&[0.3, 0.2], &[0.2, 0.7]]).unwrap();
        assert!(purification_rate(&seg, &x, Flooring::Enabled).unwrap().total().abs() < 1e-12);
    }
}
