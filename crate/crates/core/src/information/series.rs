use serde::{Deserialize, Serialize};

use super::{evaluate_snapshot, EnsembleSnapshot, Estimate, INDEX_FLOOR};
use crate::algebra::Flooring;
use crate::dynamics::{MasterSolution, Mode};
use crate::ensemble::{run_ensemble, Execution, RunConfig};
use crate::model::MeasurementModel;
use crate::{Error, Result};

/// Information measures at one snapshot time, in nats.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfoRecord {
    pub t: f64,
    /// `S_c(p_t‖q_t)` by trapezoidal integration of the rate.
    pub s_c: f64,
    pub s_c_stderr: f64,
    pub s_c_rate: f64,
    pub s_c_rate_stderr: f64,
    /// `E[S_q(ρ_t‖η_t)]`.
    pub s_quantum: f64,
    pub s_quantum_stderr: f64,
    /// `S(σ_t‖q_t η_t) = s_quantum + s_c`.
    pub s_total: f64,
    pub s_total_stderr: f64,
    pub bound_rhs: f64,
    pub bound_rhs_stderr: f64,
    pub gap: f64,
    pub gap_stderr: f64,
    pub gap_direct: f64,
    pub gap_direct_stderr: f64,
    pub s_vn_eta: f64,
    /// `s_quantum / S_q(η_t)`, missing when `S_q(η_t) ≤ INDEX_FLOOR`.
    pub goodness_ratio: Option<f64>,
    /// Pathwise estimate `mean[ln p_t − ln q_t]` of `S_c`.
    pub s_c_pathwise: f64,
    pub s_c_pathwise_stderr: f64,
}

/// A time series of records with the cumulative goodness index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfoSeries {
    pub records: Vec<InfoRecord>,
    /// `∫ s_quantum / S_q(η_t) dt`; see [`goodness_indexes`].
    pub cumulative_goodness: Option<f64>,
}

/// Trapezoidal `∫ dS_c/dt` over `records[0..=upto]`.
pub fn classical_info_gain(records: &[InfoRecord], upto: usize) -> f64 {
    classical_info_gain_between(records, 0, upto)
}

/// Trapezoidal `∫ dS_c/dt` over `records[from..=to]`.
pub fn classical_info_gain_between(records: &[InfoRecord], from: usize, to: usize) -> f64 {
    records[from..=to].windows(2).map(|w| 0.5 * (w[1].t - w[0].t) * (w[0].s_c_rate + w[1].s_c_rate)).sum()
}

/// Instantaneous goodness ratios and their trapezoidal time integral.
/// Intervals with a missing endpoint are left out of the integral; the
/// integral itself is missing when every ratio is.
pub fn goodness_indexes(records: &[InfoRecord]) -> (Vec<Option<f64>>, Option<f64>) {
    let ratios: Vec<Option<f64>> = records.iter().map(|r| (r.s_vn_eta > INDEX_FLOOR).then(|| r.s_quantum / r.s_vn_eta)).collect();
    if ratios.iter().all(Option::is_none) {
        return (ratios, None);
    }
    let integral = records
        .windows(2)
        .zip(ratios.windows(2))
        .filter_map(|(r, g)| match (g[0], g[1]) {
            (Some(a), Some(b)) => Some(0.5 * (r[1].t - r[0].t) * (a + b)),
            _ => None,
        })
        .sum();
    (ratios, Some(integral))
}

/// Builds an [`InfoSeries`] snapshot by snapshot. Each trajectory carries
/// its own trapezoidal integral of its rate contribution, so the standard
/// error of `S_c` accounts for correlations across time.
pub struct InfoAccumulator<'a> {
    model: &'a MeasurementModel,
    master: &'a MasterSolution,
    flooring: Flooring,
    s_c: f64,
    per_traj: Vec<f64>,
    prev: Option<(f64, f64, Vec<f64>)>,
    records: Vec<InfoRecord>,
}

impl<'a> InfoAccumulator<'a> {
    pub fn new(model: &'a MeasurementModel, master: &'a MasterSolution, flooring: Flooring) -> Self {
        Self { model, master, flooring, s_c: 0.0, per_traj: Vec::new(), prev: None, records: Vec::new() }
    }

    pub fn visit(&mut self, snap: &EnsembleSnapshot) -> Result<()> {
        let eval = evaluate_snapshot(self.model, self.master, snap, Some(self.flooring))?;
        let bound = eval.bound.as_ref().expect("bound requested");
        let rate = &eval.rate;
        match &self.prev {
            None => self.per_traj = vec![0.0; snap.len()],
            Some((t0, r0, z0)) => {
                if z0.len() != snap.len() {
                    return Err(Error::InvalidConfig("ensemble size changed between snapshots".into()));
                }
                let h = 0.5 * (snap.t - t0);
                self.s_c += h * (r0 + rate.rate.value);
                for ((acc, a), b) in self.per_traj.iter_mut().zip(z0).zip(&rate.samples) {
                    *acc += h * (a + b);
                }
            }
        }
        let s_c_stderr = Estimate::mean_of(&self.per_traj)?.stderr;
        let total_samples: Vec<f64> = self.per_traj.iter().zip(&eval.entropies).map(|(z, s)| z - s).collect();
        let s_total = eval.s_quantum.value + self.s_c;
        self.records.push(InfoRecord {
            t: snap.t,
            s_c: self.s_c,
            s_c_stderr,
            s_c_rate: rate.rate.value,
            s_c_rate_stderr: rate.rate.stderr,
            s_quantum: eval.s_quantum.value,
            s_quantum_stderr: eval.s_quantum.stderr,
            s_total,
            s_total_stderr: Estimate::mean_of(&total_samples)?.stderr,
            bound_rhs: bound.bound_rhs.value,
            bound_rhs_stderr: bound.bound_rhs.stderr,
            gap: bound.gap.value,
            gap_stderr: bound.gap.stderr,
            gap_direct: bound.gap_direct.value,
            gap_direct_stderr: bound.gap_direct.stderr,
            s_vn_eta: eval.s_vn_eta,
            goodness_ratio: (eval.s_vn_eta > INDEX_FLOOR).then(|| eval.s_quantum.value / eval.s_vn_eta),
            s_c_pathwise: eval.log_ratio.value,
            s_c_pathwise_stderr: eval.log_ratio.stderr,
        });
        self.prev = Some((snap.t, rate.rate.value, eval.rate.samples));
        Ok(())
    }

    pub fn finish(self) -> InfoSeries {
        let (_, cumulative_goodness) = goodness_indexes(&self.records);
        InfoSeries { records: self.records, cumulative_goodness }
    }
}

/// Runs a nonlinear-mode ensemble and evaluates every snapshot.
pub fn run_info(model: &MeasurementModel, master: &MasterSolution, config: &RunConfig, exec: Execution, flooring: Flooring) -> Result<InfoSeries> {
    if config.mode != Mode::Nonlinear {
        return Err(Error::InvalidConfig("information estimators sample the physical law and need nonlinear mode".into()));
    }
    let mut acc = InfoAccumulator::new(model, master, flooring);
    run_ensemble(model, master, config, exec, |snap| acc.visit(snap))?;
    Ok(acc.finish())
}
