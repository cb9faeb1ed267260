//! Closed-form `u`-integrals of traces of resolvent products, evaluated in
//! the eigenbasis of the state.
//!
//! With `G = (u + η)⁻¹` and `η = Σ λ_i |i⟩⟨i|`, each integrand reduces to a
//! sum over matrix-element pairs `A_ij B_ji` weighted by a scalar integral of
//! products of `1/(u + λ)`. All of these are built from the inverse
//! logarithmic mean `∫₀^∞ du / ((u + a)(u + b)) = ln(b/a) / (b − a)`.

use nalgebra::DMatrix;

use super::{eigh, DensityMatrix, Operator, C64};
use crate::{Error, Result};

/// Eigenvalue floor applied to states entering the bound integrals.
pub const EIG_FLOOR_BOUND: f64 = 1e-12;

/// Which resolvent product is integrated over `u ∈ [0, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResolventForm {
    /// `Tr{A η G B η G}`.
    Sandwich,
    /// `Tr{G A η² G B}`.
    Squared,
    /// `Tr{G A G B}`.
    Plain,
}

/// Treatment of eigenvalues below [`EIG_FLOOR_BOUND`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Flooring {
    /// Raise small eigenvalues to the floor and renormalize.
    #[default]
    Enabled,
    /// Report [`Error::RankDeficient`] instead.
    Disabled,
}

/// `ln(b/a) / (b − a)`, continuous at `a = b` where it equals `1/a`.
pub fn inverse_log_mean(a: f64, b: f64) -> f64 {
    let x = (b - a) / a;
    if x.abs() < 1e-4 {
        (1.0 - x * (0.5 - x * (1.0 / 3.0 - 0.25 * x))) / a
    } else {
        x.ln_1p() / (b - a)
    }
}

/// Scalar weight multiplying `A_ij B_ji` for eigenvalues `λ_i`, `λ_j`.
pub fn resolvent_weight(form: ResolventForm, li: f64, lj: f64) -> f64 {
    let m = inverse_log_mean(li, lj);
    match form {
        ResolventForm::Sandwich => li * lj * m,
        ResolventForm::Squared => lj * lj * m,
        ResolventForm::Plain => m,
    }
}

/// Applies the flooring policy to a normalized spectrum.
pub fn floored_spectrum(eigenvalues: &[f64], flooring: Flooring) -> Result<Vec<f64>> {
    match flooring {
        Flooring::Disabled => {
            let lo = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            if lo < EIG_FLOOR_BOUND {
                return Err(Error::RankDeficient { eigenvalue: lo, floor: EIG_FLOOR_BOUND, t: f64::NAN });
            }
            Ok(eigenvalues.to_vec())
        }
        Flooring::Enabled => {
            let raised: Vec<f64> = eigenvalues.iter().map(|&l| l.max(EIG_FLOOR_BOUND)).collect();
            let total: f64 = raised.iter().sum();
            Ok(raised.into_iter().map(|l| l / total).collect())
        }
    }
}

/// `Σ_ij A_ij B_ji w(λ_i, λ_j)` for operators already expressed in the eigenbasis.
pub(crate) fn pair_sum_in_eigenbasis(a: &DMatrix<C64>, b: &DMatrix<C64>, lambdas: &[f64], form: ResolventForm) -> C64 {
    let n = lambdas.len();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)] * resolvent_weight(form, lambdas[i], lambdas[j]);
        }
    }
    acc
}

/// `∫₀^∞ du` of the chosen resolvent trace for operators `a`, `b` and state `η`.
pub fn resolvent_pair_integral(a: &Operator, b: &Operator, eta: &DensityMatrix, form: ResolventForm, flooring: Flooring) -> Result<C64> {
    let dim = eta.dim();
    for op in [a, b] {
        if op.dim() != dim {
            return Err(Error::DimMismatch { expected: dim, found: op.dim() });
        }
    }
    let es = eigh(eta.as_operator())?;
    let lambdas = floored_spectrum(&es.eigenvalues, flooring)?;
    let at = es.to_eigenbasis(a);
    let bt = es.to_eigenbasis(b);
    Ok(pair_sum_in_eigenbasis(&at, &bt, &lambdas, form))
}
