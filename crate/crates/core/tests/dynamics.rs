mod common;

use common::*;
use proptest::prelude::*;
use qtraj_core::algebra::{DensityMatrix, Operator, C64};
use qtraj_core::dynamics::{simulate_trajectory, solve_master, Mode, TimeGrid, TrajectoryState};
use qtraj_core::ensemble::{run_ensemble, sample_stats, Execution, RngStreamSpec, RunConfig};
use qtraj_core::model::{JumpChannel, MeasurementModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Strong homodyne monitoring of a driven qubit that starts pure.
fn pure_homodyne_qubit() -> MeasurementModel {
    MeasurementModel::autonomous(real_state(&[&[0.5, 0.5], &[0.5, 0.5]]), 1.0, sx().scale(0.5), vec![], vec![sz()], vec![]).unwrap()
}

/// Depolarizing noise dominates the weak monitoring, keeping states well inside the Bloch ball.
fn depolarized_qubit() -> MeasurementModel {
    MeasurementModel::autonomous(
        id2().scale(0.5),
        2.0,
        sx().scale(0.5),
        vec![sx(), Operator::pauli_y(), sz()],
        vec![sz().scale(0.2)],
        vec![JumpChannel::new(vec![sm().scale(0.3), sp().scale(0.3)], 0.09).unwrap()],
    )
    .unwrap()
}

fn worst_negativity(model: &MeasurementModel, dt: f64, paths: u64) -> f64 {
    let master = solve_master(model, TimeGrid::new(model.horizon(), dt).unwrap()).unwrap();
    let steps = master.grid.n_steps();
    (0..paths)
        .map(|i| {
            let states = simulate_trajectory(model, &master, Mode::Nonlinear, RngStreamSpec::new(4, i), steps).unwrap();
            -states.last().unwrap().min_eigenvalue
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn euler_negativity_is_first_order_in_the_step() {
    let model = pure_homodyne_qubit();
    let coarse = worst_negativity(&model, 1e-2, 40);
    let fine = worst_negativity(&model, 2.5e-3, 40);
    assert!(coarse > 0.0 && coarse <= 1e-2 * 10.0, "coarse {coarse}");
    assert!(fine <= 0.5 * coarse, "fine {fine} vs coarse {coarse}");
}

#[test]
fn interior_states_stay_positive() {
    let negativity = worst_negativity(&depolarized_qubit(), 1e-3, 40);
    assert!(negativity <= 1e-8, "{negativity}");
}

fn final_samples(model: &MeasurementModel, mode: Mode, n_traj: usize, seed: u64) -> Vec<TrajectoryState> {
    let master = solve_master(model, TimeGrid::new(1.0, 1e-3).unwrap()).unwrap();
    let steps = master.grid.n_steps();
    let config = RunConfig { n_traj, master_seed: seed, grid: master.grid, mode, snapshot_stride: steps };
    let mut last = Vec::new();
    run_ensemble(model, &master, &config, Execution::Parallel, |snap| {
        last = snap.samples.clone();
        Ok(())
    })
    .unwrap();
    last
}

#[test]
fn linear_and_nonlinear_laws_agree() {
    let model = generic_qubit();
    let n = 4000;
    let physical = final_samples(&model, Mode::Nonlinear, n, 1);
    let reference = final_samples(&model, Mode::Linear, n, 2);
    for (name, obs) in [("x", sx()), ("z", sz())] {
        let direct: Vec<f64> = physical.iter().map(|s| s.rho.expectation(&obs)).collect();
        let weighted: Vec<f64> = reference.iter().map(|s| s.log_p.exp() * s.rho.expectation(&obs)).collect();
        let (a, b) = (sample_stats(&direct).unwrap(), sample_stats(&weighted).unwrap());
        let tol = 4.0 * a.stderr.hypot(b.stderr) + 10.0 * 1e-3;
        assert!((a.mean - b.mean).abs() <= tol, "<{name}>: {} vs {} (tol {tol})", a.mean, b.mean);
    }
}

fn random_unitary(rng: &mut ChaCha8Rng, dim: usize) -> Operator {
    Operator::from_matrix(random_matrix(rng, dim).qr().q()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn unitary_jumps_leave_the_reference_density_unchanged(seed in any::<u64>(), dim in 2usize..4, rate in 0.2f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_unitary(&mut rng, dim);
        let model = MeasurementModel::autonomous(
            random_state(&mut rng, dim, 0.0).into_operator(),
            1.0,
            random_operator(&mut rng, dim).hermitian_part(),
            vec![random_operator(&mut rng, dim).scale(0.3)],
            vec![],
            vec![JumpChannel::new(vec![u.scale(rate.sqrt())], rate).unwrap()],
        )
        .unwrap();
        let master = solve_master(&model, TimeGrid::new(1.0, 1e-2).unwrap()).unwrap();
        let states = simulate_trajectory(&model, &master, Mode::Linear, RngStreamSpec::new(seed, 0), 1).unwrap();
        for s in &states {
            prop_assert!(s.log_p.abs() <= 1e-12, "log p = {} at t = {}", s.log_p, s.t);
            prop_assert!((s.mu[0] - rate).abs() <= 1e-12 * rate);
        }
    }

    #[test]
    fn trajectories_stay_normalized(seed in any::<u64>(), mode in prop_oneof![Just(Mode::Linear), Just(Mode::Nonlinear)]) {
        let model = generic_qubit();
        let master = solve_master(&model, TimeGrid::new(0.5, 1e-3).unwrap()).unwrap();
        for s in simulate_trajectory(&model, &master, mode, RngStreamSpec::new(seed, 3), 50).unwrap() {
            let rho: &DensityMatrix = &s.rho;
            prop_assert!((rho.as_operator().trace() - C64::new(1.0, 0.0)).norm() <= 1e-12);
            prop_assert!(rho.as_operator().hermiticity_defect() <= 1e-12);
            prop_assert!(s.counts.iter().zip(&s.mu).all(|(_, &mu)| mu >= 0.0));
        }
    }
}
