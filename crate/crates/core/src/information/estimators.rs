use super::production::{direct_gap, production_terms, ReferenceTerms, Spectral};
use super::{EnsembleSnapshot, Estimate, ProductionTerms};
use crate::algebra::{entropy_of_spectrum, von_neumann_entropy, Flooring};
use crate::dynamics::{MasterSolution, INTENSITY_FLOOR};
use crate::ensemble::sample_stats;
use crate::model::MeasurementModel;
use crate::{Error, Result};

/// `dS_c/dt` and its parts.
#[derive(Clone, Debug, PartialEq)]
pub struct RateEstimate {
    pub rate: Estimate,
    /// `½ Σ_j Var[m_j]`.
    pub diffusive: Estimate,
    /// `mean[μ_k ln(μ_k/ν_k)]` per channel.
    pub jump: Vec<Estimate>,
    /// Per-trajectory contributions whose mean is `rate`.
    pub samples: Vec<f64>,
}

fn check_index(snap: &EnsembleSnapshot, master: &MasterSolution) -> Result<usize> {
    if snap.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let grid = master.grid;
    if snap.step > grid.n_steps() || (grid.time(snap.step) - snap.t).abs() > 1e-9 * grid.dt().max(1.0) {
        return Err(Error::InvalidConfig(format!("snapshot at t = {} (step {}) is not on the master grid", snap.t, snap.step)));
    }
    Ok(snap.step)
}

/// `μ ln(μ/ν)` with the intensity-floor conventions.
fn relative_intensity(t: f64, channel: usize, mu: f64, nu: f64) -> Result<f64> {
    if mu <= INTENSITY_FLOOR {
        return Ok(0.0);
    }
    if nu <= INTENSITY_FLOOR {
        return Err(Error::IntensityMismatch { t, channel, mu, nu });
    }
    Ok(mu * (mu / nu).ln())
}

/// Rate `½ Σ_j Var[m_j] + Σ_k mean[μ_k ln(μ_k/ν_k)]` with per-trajectory
/// influence values for the standard error. The variance is the population
/// variance over the ensemble.
pub fn rate_breakdown(snap: &EnsembleSnapshot, master: &MasterSolution) -> Result<RateEstimate> {
    let i = check_index(snap, master)?;
    let nu = &master.nu[i];
    let n_diff = snap.samples[0].m.len();
    let means: Vec<f64> = (0..n_diff).map(|j| sample_stats(&snap.m_samples(j)).map(|s| s.mean)).collect::<Result<_>>()?;

    let mut diffusive = Vec::with_capacity(snap.len());
    let mut jumps: Vec<Vec<f64>> = vec![Vec::with_capacity(snap.len()); nu.len()];
    for s in &snap.samples {
        diffusive.push(0.5 * s.m.iter().zip(&means).map(|(m, mean)| (m - mean) * (m - mean)).sum::<f64>());
        for (k, col) in jumps.iter_mut().enumerate() {
            col.push(relative_intensity(snap.t, k, s.mu[k], nu[k])?);
        }
    }
    let samples: Vec<f64> = (0..snap.len()).map(|r| diffusive[r] + jumps.iter().map(|c| c[r]).sum::<f64>()).collect();
    Ok(RateEstimate {
        rate: Estimate::mean_of(&samples)?,
        diffusive: Estimate::mean_of(&diffusive)?,
        jump: jumps.iter().map(|c| Estimate::mean_of(c)).collect::<Result<_>>()?,
        samples,
    })
}

/// `dS_c/dt` at the snapshot time.
pub fn info_gain_rate(snap: &EnsembleSnapshot, master: &MasterSolution) -> Result<Estimate> {
    Ok(rate_breakdown(snap, master)?.rate)
}

/// `S_q(η_t) − mean[S_q(ρ_t)]`.
pub fn quantum_mutual(snap: &EnsembleSnapshot, master: &MasterSolution) -> Result<Estimate> {
    let i = check_index(snap, master)?;
    let entropies: Vec<f64> = snap.states().map(von_neumann_entropy).collect();
    let mean = Estimate::mean_of(&entropies)?;
    Ok(Estimate::new(von_neumann_entropy(&master.eta[i]) - mean.value, mean.stderr))
}

/// Both sides of the derivative bound at one snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundEstimate {
    /// `P(η_t) − mean[P(ρ_t)]`.
    pub bound_rhs: Estimate,
    /// `bound_rhs − dS_c/dt`.
    pub gap: Estimate,
    /// Mean of the per-trajectory explicit gap expression.
    pub gap_direct: Estimate,
    /// Purification rate of trajectories started at `η_t`.
    pub eta_production: ProductionTerms,
}

/// Everything the information pipeline needs from one snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotEvaluation {
    pub t: f64,
    pub rate: RateEstimate,
    pub s_quantum: Estimate,
    pub s_vn_eta: f64,
    /// `S_q(ρ_t)` per trajectory.
    pub entropies: Vec<f64>,
    pub bound: Option<BoundEstimate>,
    /// Pathwise estimate `mean[ln p_t − ln q_t]` of `S_c`.
    pub log_ratio: Estimate,
}

/// Evaluates all estimators in a single pass over the trajectories. The
/// bound is skipped when `flooring` is `None`.
pub fn evaluate_snapshot(
    model: &MeasurementModel,
    master: &MasterSolution,
    snap: &EnsembleSnapshot,
    flooring: Option<Flooring>,
) -> Result<SnapshotEvaluation> {
    let i = check_index(snap, master)?;
    let rate = rate_breakdown(snap, master)?;
    let eta = &master.eta[i];
    let s_vn_eta = von_neumann_entropy(eta);
    let log_ratio = Estimate::mean_of(&snap.log_ratio_samples())?;

    let (entropies, bound) = match flooring {
        None => (snap.states().map(von_neumann_entropy).collect::<Vec<_>>(), None),
        Some(flooring) => {
            let at = |e: Error| e.at_time(snap.t);
            let seg = model.segment_after(snap.t)?;
            let reference = ReferenceTerms::new(seg, eta.as_operator(), flooring).map_err(at)?;
            let p_eta = reference.production.total();
            let mut entropies = Vec::with_capacity(snap.len());
            let mut production = Vec::with_capacity(snap.len());
            let mut gap_samples = Vec::with_capacity(snap.len());
            let mut direct = Vec::with_capacity(snap.len());
            for (s, z) in snap.samples.iter().zip(&rate.samples) {
                let sr = Spectral::new(s.rho.as_operator(), flooring).map_err(at)?;
                let max = (s.rho.dim() as f64).ln();
                entropies.push(entropy_of_spectrum(sr.raw_eigenvalues()).clamp(0.0, max));
                let p = production_terms(seg, &sr).map_err(at)?.total();
                production.push(p);
                gap_samples.push(p_eta - p - z);
                direct.push(direct_gap(seg, &reference, &sr).map_err(at)?);
            }
            let mean_p = Estimate::mean_of(&production)?;
            let bound = BoundEstimate {
                bound_rhs: Estimate::new(p_eta - mean_p.value, mean_p.stderr),
                gap: Estimate::mean_of(&gap_samples)?,
                gap_direct: Estimate::mean_of(&direct)?,
                eta_production: reference.production,
            };
            (entropies, Some(bound))
        }
    };
    let mean_s = Estimate::mean_of(&entropies)?;
    Ok(SnapshotEvaluation {
        t: snap.t,
        rate,
        s_quantum: Estimate::new(s_vn_eta - mean_s.value, mean_s.stderr),
        s_vn_eta,
        entropies,
        bound,
        log_ratio,
    })
}

/// Right-hand side and gap of the derivative bound at one snapshot.
pub fn bound_estimates(model: &MeasurementModel, master: &MasterSolution, snap: &EnsembleSnapshot, flooring: Flooring) -> Result<BoundEstimate> {
    Ok(evaluate_snapshot(model, master, snap, Some(flooring))?.bound.expect("bound requested"))
}

/// `d/dt E[S_q(ρ_t)] − d/du E[S_q(ρ_u^t)]|_{u=t⁺}`.
pub fn bound_rhs(model: &MeasurementModel, master: &MasterSolution, snap: &EnsembleSnapshot, flooring: Flooring) -> Result<Estimate> {
    Ok(bound_estimates(model, master, snap, flooring)?.bound_rhs)
}

/// `bound_rhs − dS_c/dt`, by difference and by the explicit expression.
pub fn bound_gap(model: &MeasurementModel, master: &MasterSolution, snap: &EnsembleSnapshot, flooring: Flooring) -> Result<(Estimate, Estimate)> {
    let b = bound_estimates(model, master, snap, flooring)?;
    Ok((b.gap, b.gap_direct))
}
