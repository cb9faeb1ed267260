use super::{eigh, DensityMatrix, Operator};
use crate::{Error, Result};

/// Eigenvalues at or below this contribute nothing to `−λ ln λ`.
pub const EIG_FLOOR: f64 = 1e-14;
/// Weight of `σ` on the numerical kernel of `τ` above which `S(σ‖τ) = +∞`.
pub const SUPPORT_TOL: f64 = 1e-10;

/// `−Σ λ ln λ` over a spectrum, with `0 ln 0 := 0`.
pub fn entropy_of_spectrum(eigenvalues: &[f64]) -> f64 {
    eigenvalues.iter().filter(|&&l| l > EIG_FLOOR).map(|&l| -l * l.ln()).sum()
}

/// Von Neumann entropy `S_q(ρ) = −Tr{ρ ln ρ}` in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let es = eigh(rho.as_operator()).expect("density matrices are Hermitian");
    let max = (rho.dim() as f64).ln();
    entropy_of_spectrum(&es.eigenvalues).clamp(0.0, max)
}

/// `Tr{X ln X}` for a positive semidefinite, not necessarily normalized `X`.
pub fn trace_x_log_x(x: &Operator) -> Result<f64> {
    let es = eigh(x)?;
    Ok(es.eigenvalues.iter().filter(|&&l| l > 0.0).map(|&l| l * l.ln()).sum())
}

/// Quantum relative entropy `S_q(σ‖τ) = Tr{σ(ln σ − ln τ)}`; `+∞` when the
/// support of `σ` is not contained in that of `τ`.
pub fn quantum_relative_entropy(sigma: &DensityMatrix, tau: &DensityMatrix) -> f64 {
    let s = eigh(sigma.as_operator()).expect("density matrices are Hermitian");
    let t = eigh(tau.as_operator()).expect("density matrices are Hermitian");
    let neg_entropy = -entropy_of_spectrum(&s.eigenvalues);
    // Tr{σ ln τ} = Σ_i ln κ_i ⟨v_i|σ|v_i⟩
    let sigma_in_tau = t.to_eigenbasis(sigma.as_operator());
    let mut cross = 0.0;
    for (i, &kappa) in t.eigenvalues.iter().enumerate() {
        let weight = sigma_in_tau[(i, i)].re;
        if kappa <= EIG_FLOOR {
            if weight > SUPPORT_TOL {
                return f64::INFINITY;
            }
            continue;
        }
        cross += weight * kappa.ln();
    }
    (neg_entropy - cross).max(0.0)
}

/// Classical relative entropy `Σ p ln(p/q)` of two discrete densities;
/// `+∞` when `p` charges a zero of `q`.
pub fn classical_relative_entropy(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimMismatch { expected: p.len(), found: q.len() });
    }
    for (name, d) in [("p", p), ("q", q)] {
        if d.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::InvalidDistribution(format!("{name} has a negative or non-finite entry")));
        }
        let total: f64 = d.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!("{name} sums to {total}")));
        }
    }
    let mut acc = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Ok(f64::INFINITY);
        }
        acc += pi * (pi / qi).ln();
    }
    Ok(acc.max(0.0))
}
