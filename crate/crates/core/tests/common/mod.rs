//! Models, random generators and numerical oracles shared by the
//! integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use qtraj_core::algebra::{eigh, DensityMatrix, Operator, ResolventForm, C64};
use qtraj_core::model::{JumpChannel, MeasurementModel};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn sx() -> Operator {
    Operator::pauli_x()
}

pub fn sz() -> Operator {
    Operator::pauli_z()
}

pub fn sm() -> Operator {
    Operator::sigma_minus()
}

pub fn sp() -> Operator {
    Operator::sigma_plus()
}

pub fn id2() -> Operator {
    Operator::identity(2)
}

pub fn real_state(rows: &[&[f64]]) -> Operator {
    Operator::from_real_rows(rows).unwrap()
}

/// `H = σx/2`, dephasing `L = 0.2 σz`, homodyne `R = σz/2` and a counting
/// channel `{σ₋, σ₊/2}` with full-rank intensity `diag(1, 1/4)`.
pub fn generic_qubit() -> MeasurementModel {
    MeasurementModel::autonomous(
        real_state(&[&[0.7, 0.2], &[0.2, 0.3]]),
        2.0,
        sx().scale(0.5),
        vec![sz().scale(0.2)],
        vec![sz().scale(0.5)],
        vec![JumpChannel::new(vec![sm(), sp().scale(0.5)], 1.0).unwrap()],
    )
    .unwrap()
}

/// Counting-only version of [`generic_qubit`].
pub fn counting_qubit() -> MeasurementModel {
    MeasurementModel::autonomous(
        real_state(&[&[0.7, 0.2], &[0.2, 0.3]]),
        1.0,
        sx().scale(0.5),
        vec![],
        vec![],
        vec![JumpChannel::new(vec![sm(), sp().scale(0.5)], 1.0).unwrap()],
    )
    .unwrap()
}

/// Every operator and the initial state diagonal.
pub fn commuting_qubit() -> MeasurementModel {
    MeasurementModel::autonomous(
        Operator::from_diagonal(&[0.6, 0.4]),
        2.0,
        sz().scale(0.3),
        vec![],
        vec![sz().scale(0.5)],
        vec![JumpChannel::new(vec![Operator::from_diagonal(&[1.0, 0.3])], 1.0).unwrap()],
    )
    .unwrap()
}

/// Measurements proportional to the identity, so that `ρ_t = η_t` on every path.
pub fn identity_measurement_qubit() -> MeasurementModel {
    let h = &sx().scale(0.5) + &sz().scale(0.2);
    MeasurementModel::autonomous(
        Operator::from_rows(&[vec![c(0.7, 0.0), c(0.2, -0.1)], vec![c(0.2, 0.1), c(0.3, 0.0)]]).unwrap(),
        2.0,
        h,
        vec![sz().scale(0.3)],
        vec![id2().scale(0.7)],
        vec![JumpChannel::new(vec![id2().scale(0.8f64.sqrt())], 1.0).unwrap()],
    )
    .unwrap()
}

/// `R + R† ∝ 1` and `J ∝ 1` with nontrivial state disturbance.
pub fn zero_information_qubit(initial: Operator) -> MeasurementModel {
    let h = &sx().scale(0.5) + &sz().scale(0.2);
    let mut r = id2().scale(0.3);
    r.add_scaled(c(0.0, 0.5), &sx());
    MeasurementModel::autonomous(initial, 2.0, h, vec![], vec![r], vec![JumpChannel::new(vec![sm(), sp()], 1.0).unwrap()]).unwrap()
}

/// Spontaneous decay `V = √γ σ₋` at reference rate `γ` from `I/2`.
pub fn decaying_qubit(gamma: f64, horizon: f64) -> MeasurementModel {
    MeasurementModel::autonomous(
        Operator::identity(2).scale(0.5),
        horizon,
        Operator::zeros(2),
        vec![],
        vec![],
        vec![JumpChannel::new(vec![sm().scale(gamma.sqrt())], gamma).unwrap()],
    )
    .unwrap()
}

pub fn random_matrix<R: Rng>(rng: &mut R, dim: usize) -> DMatrix<C64> {
    DMatrix::from_fn(dim, dim, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

pub fn random_operator<R: Rng>(rng: &mut R, dim: usize) -> Operator {
    Operator::from_matrix(random_matrix(rng, dim)).unwrap()
}

/// Ginibre state `G G† / Tr` mixed with `I/d` so that its smallest eigenvalue is at least `floor`.
pub fn random_state<R: Rng>(rng: &mut R, dim: usize, floor: f64) -> DensityMatrix {
    let g = random_matrix(rng, dim);
    let mut m = &g * g.adjoint();
    let tr = m.trace().re;
    m /= c(tr, 0.0);
    let w = floor * dim as f64;
    let mixed = m * c(1.0 - w, 0.0) + DMatrix::identity(dim, dim) * c(w / dim as f64, 0.0);
    DensityMatrix::new(Operator::from_matrix(mixed).unwrap()).unwrap()
}

/// Kraus operators of a random CPTP map: `K_i S^{-1/2}` with `S = Σ K_i† K_i`.
pub fn random_channel<R: Rng>(rng: &mut R, dim: usize, n_kraus: usize) -> Vec<Operator> {
    let raw: Vec<DMatrix<C64>> = (0..n_kraus).map(|_| random_matrix(rng, dim)).collect();
    let s = raw.iter().fold(DMatrix::zeros(dim, dim), |acc, k| acc + k.adjoint() * k);
    let es = eigh(&Operator::from_matrix(s).unwrap()).unwrap();
    let inv_sqrt = es.map_spectrum(|l| 1.0 / l.sqrt());
    raw.into_iter().map(|k| Operator::from_matrix(k * inv_sqrt.matrix()).unwrap()).collect()
}

pub fn apply_channel(kraus: &[Operator], rho: &DensityMatrix) -> DensityMatrix {
    let mut out = Operator::zeros(rho.dim());
    for k in kraus {
        out += &k.sandwich(rho.as_operator());
    }
    DensityMatrix::new(out.hermitian_part()).unwrap()
}

pub fn kron(a: &Operator, b: &Operator) -> Operator {
    Operator::from_matrix(a.matrix().kronecker(b.matrix())).unwrap()
}

/// Partial traces of an operator on `C^da ⊗ C^db`.
pub fn partial_traces(x: &Operator, da: usize, db: usize) -> (Operator, Operator) {
    let m = x.matrix();
    let a = Operator::from_fn(da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum());
    let b = Operator::from_fn(db, |i, j| (0..da).map(|k| m[(k * db + i, k * db + j)]).sum());
    (a, b)
}

/// Direct evaluation of the resolvent integrand at `u` with an explicit inverse.
pub fn resolvent_integrand(a: &Operator, b: &Operator, eta: &DensityMatrix, form: ResolventForm, u: f64) -> C64 {
    let e = eta.as_operator().matrix();
    let n = e.nrows();
    let g = (DMatrix::identity(n, n) * c(u, 0.0) + e).try_inverse().expect("u + η is invertible");
    let (a, b) = (a.matrix(), b.matrix());
    let prod = match form {
        ResolventForm::Sandwich => a * e * &g * b * e * &g,
        ResolventForm::Squared => &g * a * e * e * &g * b,
        ResolventForm::Plain => &g * a * &g * b,
    };
    prod.trace()
}

const GK_NODES: [f64; 8] = [
    0.9914553711208126,
    0.9491079123427585,
    0.8648644233597691,
    0.7415311855993945,
    0.5860872354676911,
    0.4058451513773972,
    0.20778495500789848,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022935322010529224,
    0.06309209262997856,
    0.10479001032225019,
    0.14065325971552592,
    0.1690047266392679,
    0.19035057806478542,
    0.20443294007529889,
    0.20948214108472782,
];
const GAUSS_WEIGHTS: [f64; 4] = [0.1294849661688697, 0.27970539148927664, 0.3818300505051189, 0.4179591836734694];

/// 15-point Kronrod estimate and its distance from the embedded 7-point Gauss rule.
fn gauss_kronrod<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let centre = f(mid);
    let mut kronrod = centre * GK_WEIGHTS[7];
    let mut gauss = centre * GAUSS_WEIGHTS[3];
    for i in 0..7 {
        let pair = f(mid - half * GK_NODES[i]) + f(mid + half * GK_NODES[i]);
        kronrod += pair * GK_WEIGHTS[i];
        if i % 2 == 1 {
            gauss += pair * GAUSS_WEIGHTS[i / 2];
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).norm())
}

fn adaptive<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> C64 {
    let (value, err) = gauss_kronrod(f, a, b);
    if err <= tol.max(1e2 * f64::EPSILON * value.norm()) || depth == 0 {
        return value;
    }
    let mid = 0.5 * (a + b);
    adaptive(f, a, mid, 0.5 * tol, depth - 1) + adaptive(f, mid, b, 0.5 * tol, depth - 1)
}

/// `∫₀^∞ f(u) du` by adaptive Gauss–Kronrod after `u = s/(1 − s)`.
pub fn integrate_half_line<F: Fn(f64) -> C64>(f: F, abs_tol: f64) -> C64 {
    let g = |s: f64| {
        let one_minus = 1.0 - s;
        f(s / one_minus) / (one_minus * one_minus)
    };
    adaptive(&g, 0.0, 1.0, abs_tol, 40)
}
