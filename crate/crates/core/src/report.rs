//! Output formats: the information and bound CSVs, the trajectory snapshot
//! CSV and the run summary JSON.
//!
//! Floats are written with 17 significant digits so that they round-trip;
//! missing values are empty fields.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dynamics::TrajectoryState;
use crate::ensemble::RunConfig;
use crate::information::{InfoRecord, InfoSeries};
use crate::Result;

pub const INFO_HEADER: &str =
    "t,S_c,S_c_stderr,dSc_dt,dSc_dt_stderr,S_quantum,S_quantum_stderr,S_total,bound_rhs,bound_rhs_stderr,gap,gap_stderr,S_vn_eta,goodness_ratio";
pub const BOUND_HEADER: &str = "t,dSc_dt,dSc_dt_stderr,bound_rhs,bound_rhs_stderr,gap,gap_stderr,gap_direct,gap_direct_stderr";

/// Unit of the entropy columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

impl Units {
    /// Factor applied to a value in nats.
    pub fn scale(self) -> f64 {
        match self {
            Units::Nats => 1.0,
            Units::Bits => std::f64::consts::LN_2.recip(),
        }
    }
}

/// `{:.16e}`: 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn join(fields: impl IntoIterator<Item = String>) -> String {
    fields.into_iter().collect::<Vec<_>>().join(",")
}

pub fn write_info_csv<W: Write>(out: &mut W, records: &[InfoRecord], units: Units) -> Result<()> {
    let u = units.scale();
    writeln!(out, "{INFO_HEADER}")?;
    for r in records {
        let mut fields: Vec<String> = [
            r.s_c,
            r.s_c_stderr,
            r.s_c_rate,
            r.s_c_rate_stderr,
            r.s_quantum,
            r.s_quantum_stderr,
            r.s_total,
            r.bound_rhs,
            r.bound_rhs_stderr,
            r.gap,
            r.gap_stderr,
            r.s_vn_eta,
        ]
        .iter()
        .map(|x| format_float(x * u))
        .collect();
        fields.insert(0, format_float(r.t));
        fields.push(r.goodness_ratio.map(format_float).unwrap_or_default());
        writeln!(out, "{}", join(fields))?;
    }
    Ok(())
}

pub fn write_bound_csv<W: Write>(out: &mut W, records: &[InfoRecord], units: Units) -> Result<()> {
    let u = units.scale();
    writeln!(out, "{BOUND_HEADER}")?;
    for r in records {
        let values = [r.s_c_rate, r.s_c_rate_stderr, r.bound_rhs, r.bound_rhs_stderr, r.gap, r.gap_stderr, r.gap_direct, r.gap_direct_stderr];
        writeln!(out, "{}", join(std::iter::once(format_float(r.t)).chain(values.iter().map(|x| format_float(x * u)))))?;
    }
    Ok(())
}

/// Header of the trajectory snapshot CSV for a model of dimension `dim`.
pub fn snapshot_header(dim: usize, n_diffusive: usize, n_jump: usize) -> String {
    let mut cols = vec!["traj".to_string(), "t".to_string()];
    for i in 0..dim {
        for j in 0..dim {
            cols.push(format!("rho_{i}{j}_re"));
            cols.push(format!("rho_{i}{j}_im"));
        }
    }
    cols.push("log_p".into());
    cols.push("log_q".into());
    cols.extend((1..=n_diffusive).map(|j| format!("W_{j}")));
    cols.extend((1..=n_jump).map(|k| format!("N_{k}")));
    cols.join(",")
}

/// One snapshot CSV row; `ρ` entries in row-major order.
pub fn snapshot_row(traj: u64, state: &TrajectoryState) -> String {
    let m = state.rho.as_operator().matrix();
    let n = m.nrows();
    let mut fields = vec![traj.to_string(), format_float(state.t)];
    for i in 0..n {
        for j in 0..n {
            fields.push(format_float(m[(i, j)].re));
            fields.push(format_float(m[(i, j)].im));
        }
    }
    fields.push(format_float(state.log_p));
    fields.push(format_float(state.log_q));
    fields.extend(state.w.iter().map(|&w| format_float(w)));
    fields.extend(state.counts.iter().map(|c| c.to_string()));
    join(fields)
}

/// Final values of an information run with its Monte Carlo metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Summary {
    pub units: Units,
    pub t: f64,
    pub s_c: f64,
    pub s_c_stderr: f64,
    pub s_c_pathwise: f64,
    pub s_c_pathwise_stderr: f64,
    pub s_quantum: f64,
    pub s_quantum_stderr: f64,
    pub s_total: f64,
    pub s_total_stderr: f64,
    /// Time integral of the goodness ratio; `null` when undefined throughout.
    pub cumulative_goodness: Option<f64>,
    pub seed: u64,
    pub n_traj: usize,
    pub dt: f64,
    pub t_max: f64,
    pub snapshot_stride: usize,
    /// Variances are population variances; standard errors use `s/√N`.
    pub variance_convention: String,
}

impl Summary {
    pub fn new(series: &InfoSeries, config: &RunConfig, units: Units) -> Self {
        let last = series.records.last().expect("a run has at least one snapshot");
        let u = units.scale();
        Self {
            units,
            t: last.t,
            s_c: last.s_c * u,
            s_c_stderr: last.s_c_stderr * u,
            s_c_pathwise: last.s_c_pathwise * u,
            s_c_pathwise_stderr: last.s_c_pathwise_stderr * u,
            s_quantum: last.s_quantum * u,
            s_quantum_stderr: last.s_quantum_stderr * u,
            s_total: last.s_total * u,
            s_total_stderr: last.s_total_stderr * u,
            cumulative_goodness: series.cumulative_goodness,
            seed: config.master_seed,
            n_traj: config.n_traj,
            dt: config.grid.dt(),
            t_max: config.grid.t_max(),
            snapshot_stride: config.snapshot_stride,
            variance_convention: "population variance; stderr = sample std / sqrt(N)".into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summaries always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
