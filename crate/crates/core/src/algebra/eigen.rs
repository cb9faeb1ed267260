use nalgebra::{DMatrix, SymmetricEigen};

use super::{Operator, C64, TOL_HERM};
use crate::{Error, Result};

/// Spectral decomposition `A = U diag(λ) U†` of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    /// Eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Unitary whose columns are the matching eigenvectors.
    pub eigenvectors: Operator,
}

impl EigenSystem {
    /// `U f(Λ) U†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Operator {
        let values: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.with_spectrum(&values)
    }

    /// `U diag(values) U†` for a replacement spectrum.
    pub fn with_spectrum(&self, values: &[f64]) -> Operator {
        let u = self.eigenvectors.matrix();
        let n = u.nrows();
        let mut scaled = u.clone();
        for (j, &v) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(v);
        }
        Operator::from_matrix_unchecked(scaled * u.adjoint()).hermitian_part_exact(n)
    }

    pub fn reconstruct(&self) -> Operator {
        self.with_spectrum(&self.eigenvalues)
    }

    /// Matrix elements of `a` in the eigenbasis, `U† a U`.
    pub fn to_eigenbasis(&self, a: &Operator) -> DMatrix<C64> {
        let u = self.eigenvectors.matrix();
        u.adjoint() * a.matrix() * u
    }
}

impl Operator {
    // Used after spectral reconstruction, where the result is Hermitian up to rounding.
    fn hermitian_part_exact(self, n: usize) -> Operator {
        let mut m = self.into_matrix();
        for i in 0..n {
            m[(i, i)].im = 0.0;
            for j in (i + 1)..n {
                let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                m[(i, j)] = avg;
                m[(j, i)] = avg.conj();
            }
        }
        Operator::from_matrix_unchecked(m)
    }
}

/// Hermitian eigendecomposition with ascending eigenvalues.
///
/// The input is symmetrized before decomposition; inputs whose entrywise
/// Hermiticity defect exceeds `TOL_HERM` (relative to their largest entry
/// when that exceeds one) are rejected.
pub fn eigh(a: &Operator) -> Result<EigenSystem> {
    let defect = a.hermiticity_defect();
    if defect > TOL_HERM * a.max_abs().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    let herm = a.hermitian_part().into_matrix();
    let n = herm.nrows();
    let se = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| se.eigenvectors[(r, order[c])]);
    Ok(EigenSystem { eigenvalues, eigenvectors: Operator::from_matrix_unchecked(vectors) })
}

/// Smallest eigenvalue of the Hermitian part of `a`, with closed forms for
/// dimensions one and two.
pub fn min_eigenvalue(a: &Operator) -> f64 {
    let m = a.matrix();
    match a.dim() {
        1 => m[(0, 0)].re,
        2 => {
            let (p, q) = (m[(0, 0)].re, m[(1, 1)].re);
            let off = (m[(0, 1)] + m[(1, 0)].conj()) * 0.5;
            let half_gap = (0.5 * (p - q)).hypot(off.norm());
            0.5 * (p + q) - half_gap
        }
        _ => {
            let herm = a.hermitian_part().into_matrix();
            SymmetricEigen::new(herm).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
        }
    }
}
