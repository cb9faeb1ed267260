//! Dense complex operators, density matrices and the entropy primitives built
//! on their spectra.

mod eigen;
mod entropy;
mod resolvent;

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
pub use num_complex::Complex64 as C64;

pub use eigen::{eigh, min_eigenvalue, EigenSystem};
pub use entropy::{
    classical_relative_entropy, entropy_of_spectrum, quantum_relative_entropy, trace_x_log_x, von_neumann_entropy, EIG_FLOOR, SUPPORT_TOL,
};
pub(crate) use resolvent::pair_sum_in_eigenbasis;
pub use resolvent::{floored_spectrum, inverse_log_mean, resolvent_pair_integral, resolvent_weight, Flooring, ResolventForm, EIG_FLOOR_BOUND};

use crate::{Error, Result};

/// Maximum entrywise deviation from Hermiticity accepted for states.
pub const TOL_HERM: f64 = 1e-10;
/// Most negative eigenvalue accepted for a state.
pub const TOL_PSD: f64 = 1e-10;
/// Allowed deviation of a normalized state's trace from one.
pub const TOL_TR: f64 = 1e-9;

/// A bounded operator on a finite-dimensional Hilbert space, stored as a dense
/// square complex matrix.
#[derive(Clone, PartialEq)]
pub struct Operator(DMatrix<C64>);

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Operator{}", self.0)
    }
}

impl Operator {
    /// Wraps a square matrix with finite entries.
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::DimMismatch { expected: m.nrows().max(1), found: m.ncols() });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(m))
    }

    pub(crate) fn from_matrix_unchecked(m: DMatrix<C64>) -> Self {
        debug_assert!(m.is_square());
        Self(m)
    }

    /// Builds an operator from row-major rows; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimMismatch { expected: dim, found: bad.len() });
        }
        Self::from_matrix(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(DMatrix::from_fn(n, n, |i, j| if i == j { C64::new(diag[i], 0.0) } else { C64::new(0.0, 0.0) }))
    }

    /// `|ψ⟩⟨ψ|` for an arbitrary (not necessarily normalized) vector.
    pub fn ket_bra(psi: &[C64]) -> Self {
        let n = psi.len();
        Self(DMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj()))
    }

    pub fn pauli_x() -> Self {
        Self::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    pub fn pauli_y() -> Self {
        let i = C64::new(0.0, 1.0);
        Self::from_rows(&[vec![C64::new(0.0, 0.0), -i], vec![i, C64::new(0.0, 0.0)]]).unwrap()
    }

    pub fn pauli_z() -> Self {
        Self::from_diagonal(&[1.0, -1.0])
    }

    /// Qubit lowering operator `|g⟩⟨e|` with basis order (e, g).
    pub fn sigma_minus() -> Self {
        Self::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]).unwrap()
    }

    pub fn sigma_plus() -> Self {
        Self::sigma_minus().adjoint()
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// `Tr{A B}` without forming the product.
    pub fn trace_product(&self, other: &Operator) -> C64 {
        let (a, b) = (&self.0, &other.0);
        let n = a.nrows();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += a[(i, j)] * b[(j, i)];
            }
        }
        acc
    }

    pub fn commutator(&self, other: &Operator) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn anticommutator(&self, other: &Operator) -> Self {
        Self(&self.0 * &other.0 + &other.0 * &self.0)
    }

    /// `A ρ A†`.
    pub fn sandwich(&self, rho: &Operator) -> Self {
        Self(&self.0 * &rho.0 * self.0.adjoint())
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    /// Largest entrywise deviation `|A_ij − conj(A_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.0.iter().zip(other.0.iter()).fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `self += c * x`.
    pub fn add_scaled(&mut self, c: C64, x: &Operator) {
        self.0.zip_apply(&x.0, |a, b| *a += c * b);
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(&self.0 * C64::new(c, 0.0))
    }
}

impl Add<&Operator> for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator(&self.0 + &rhs.0)
    }
}

impl Sub<&Operator> for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator(&self.0 - &rhs.0)
    }
}

impl Mul<&Operator> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator(&self.0 * &rhs.0)
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        Operator(&self.0 * rhs)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale(rhs)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator(-&self.0)
    }
}

impl AddAssign<&Operator> for Operator {
    fn add_assign(&mut self, rhs: &Operator) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Operator> for Operator {
    fn sub_assign(&mut self, rhs: &Operator) {
        self.0 -= &rhs.0;
    }
}

/// Outcome of projecting an operator onto the set of states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Physicalization {
    /// Smallest eigenvalue of the Hermitian part before clipping.
    pub min_eigenvalue: f64,
    /// Trace norm of the negative part that was removed.
    pub clipped: f64,
}

/// A Hermitian, positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(Operator);

impl DensityMatrix {
    /// Validates a normalized state.
    pub fn new(op: Operator) -> Result<Self> {
        let tr = Self::check_hermitian_psd(&op)?;
        if (tr - 1.0).abs() > TOL_TR {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        Ok(Self(op))
    }

    /// Validates an unnormalized state (positive trace), then normalizes it.
    pub fn normalized_from(op: Operator) -> Result<Self> {
        let tr = Self::check_hermitian_psd(&op)?;
        if tr <= 0.0 {
            return Err(Error::InvalidState(format!("trace {tr} is not positive")));
        }
        Ok(Self(op.scale(1.0 / tr)))
    }

    fn check_hermitian_psd(op: &Operator) -> Result<f64> {
        let defect = op.hermiticity_defect();
        if defect > TOL_HERM {
            return Err(Error::NotHermitian { defect });
        }
        let lo = min_eigenvalue(&op.hermitian_part());
        if lo < -TOL_PSD {
            return Err(Error::InvalidState(format!("negative eigenvalue {lo:.3e}")));
        }
        Ok(op.trace().re)
    }

    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 || !norm2.is_finite() {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        Ok(Self(Operator::ket_bra(psi).scale(1.0 / norm2)))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(Operator::identity(dim).scale(1.0 / dim as f64))
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(Operator::from_diagonal(probs))
    }

    /// Projects an arbitrary operator onto the state space: symmetrize,
    /// clip negative eigenvalues, renormalize.
    pub fn physicalize(op: &Operator) -> Result<(Self, Physicalization)> {
        let herm = op.hermitian_part();
        let min = min_eigenvalue(&herm);
        let (clean, clipped) = if min < 0.0 {
            let es = eigh(&herm)?;
            let clipped: f64 = es.eigenvalues.iter().filter(|&&l| l < 0.0).map(|l| -l).sum();
            (es.map_spectrum(|l| l.max(0.0)), clipped)
        } else {
            (herm, 0.0)
        };
        let tr = clean.trace().re;
        if !tr.is_finite() || tr <= 0.0 {
            return Err(Error::InvalidState(format!("trace {tr} is not positive")));
        }
        Ok((Self(clean.scale(1.0 / tr)), Physicalization { min_eigenvalue: min, clipped }))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn as_operator(&self) -> &Operator {
        &self.0
    }

    pub fn into_operator(self) -> Operator {
        self.0
    }

    /// Purity `Tr{ρ²}`.
    pub fn purity(&self) -> f64 {
        self.0.trace_product(&self.0).re
    }

    /// Trace distance `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let diff = (&self.0 - &other.0).hermitian_part();
        // the difference is Hermitian by construction
        let es = eigh(&diff).expect("difference of states is Hermitian");
        0.5 * es.eigenvalues.iter().map(|l| l.abs()).sum::<f64>()
    }

    /// Expectation value `Tr{A ρ}` (real part).
    pub fn expectation(&self, a: &Operator) -> f64 {
        a.trace_product(&self.0).re
    }
}

impl AsRef<Operator> for DensityMatrix {
    fn as_ref(&self) -> &Operator {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (Operator::pauli_x(), Operator::pauli_y(), Operator::pauli_z());
        let xy = &x * &y;
        let iz = &z * C64::new(0.0, 1.0);
        assert!(xy.max_abs_diff(&iz) < 1e-15);
        assert!(x.commutator(&x).max_abs() == 0.0);
        assert!(x.anticommutator(&y).max_abs() < 1e-15);
    }

    #[test]
    fn sandwich_and_trace_product() {
        let sm = Operator::sigma_minus();
        let excited = Operator::from_diagonal(&[1.0, 0.0]);
        let out = sm.sandwich(&excited);
        assert_eq!(out, Operator::from_diagonal(&[0.0, 1.0]));
        let a = Operator::pauli_x();
        let b = Operator::from_diagonal(&[0.25, 0.75]);
        assert!((a.trace_product(&b) - (&a * &b).trace()).norm() < 1e-15);
    }

    #[test]
    fn rejects_non_square_and_non_finite() {
        assert!(matches!(Operator::from_rows(&[vec![C64::new(1.0, 0.0)], vec![]]), Err(Error::DimMismatch { .. })));
        let m = DMatrix::from_element(2, 2, C64::new(f64::NAN, 0.0));
        assert!(matches!(Operator::from_matrix(m), Err(Error::NonFinite)));
    }

    #[test]
    fn density_matrix_invariants() {
        assert!(DensityMatrix::diagonal(&[0.25, 0.75]).is_ok());
        assert!(DensityMatrix::diagonal(&[0.5, 0.6]).is_err());
        assert!(DensityMatrix::diagonal(&[1.2, -0.2]).is_err());
        let skew = Operator::from_rows(&[vec![C64::new(0.5, 0.0), C64::new(0.1, 0.0)], vec![C64::new(0.2, 0.0), C64::new(0.5, 0.0)]]).unwrap();
        assert!(matches!(DensityMatrix::new(skew), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn physicalize_clips_and_renormalizes() {
        let op = Operator::from_diagonal(&[1.1, -0.1]);
        let (rho, info) = DensityMatrix::physicalize(&op).unwrap();
        assert!((info.min_eigenvalue + 0.1).abs() < 1e-14);
        assert!((info.clipped - 0.1).abs() < 1e-14);
        assert!(rho.as_operator().max_abs_diff(&Operator::from_diagonal(&[1.0, 0.0])) < 1e-14);
    }

    #[test]
    fn trace_distance_of_orthogonal_states() {
        let a = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let b = DensityMatrix::diagonal(&[0.0, 1.0]).unwrap();
        assert!((a.trace_distance(&b) - 1.0).abs() < 1e-14);
        assert_eq!(a.trace_distance(&a), 0.0);
    }
}
