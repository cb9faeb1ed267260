use serde::{Deserialize, Serialize};

use crate::algebra::{DensityMatrix, Operator};
use crate::information::EnsembleSnapshot;
use crate::{Error, Result};

/// Mean, population variance and standard error of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub n: usize,
    pub mean: f64,
    /// Population variance `Σ (x − x̄)² / N`.
    pub variance: f64,
    /// Standard error of the mean, `s / √N` with the sample standard
    /// deviation `s² = Σ (x − x̄)² / (N − 1)`; zero for a single sample.
    pub stderr: f64,
}

/// Statistics of `xs`, summed in index order.
pub fn sample_stats(xs: &[f64]) -> Result<SampleStats> {
    let n = xs.len();
    if n == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let nf = n as f64;
    // shifted by the first sample: exact for constant data
    let shift = xs[0];
    let mean = shift + xs.iter().map(|x| x - shift).sum::<f64>() / nf;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    let stderr = if n > 1 { (ss / (nf - 1.0) / nf).sqrt() } else { 0.0 };
    Ok(SampleStats { n, mean, variance: ss / nf, stderr })
}

/// Ensemble average of states, renormalized.
pub fn mean_state<'a>(states: impl IntoIterator<Item = &'a DensityMatrix>) -> Result<DensityMatrix> {
    let mut iter = states.into_iter();
    let first = iter.next().ok_or(Error::EmptyEnsemble)?;
    let mut acc: Operator = first.as_operator().clone();
    let mut n = 1usize;
    for s in iter {
        acc += s.as_operator();
        n += 1;
    }
    Ok(DensityMatrix::physicalize(&acc.scale(1.0 / n as f64))?.0)
}

/// Ensemble averages at one snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotReduction {
    pub t: f64,
    pub mean_state: DensityMatrix,
    pub m: Vec<SampleStats>,
    pub mu: Vec<SampleStats>,
    pub log_p: SampleStats,
    pub log_ratio: SampleStats,
    pub w: Vec<SampleStats>,
    pub counts: Vec<SampleStats>,
}

pub fn reduce_snapshot(snap: &EnsembleSnapshot) -> Result<SnapshotReduction> {
    let first = snap.samples.first().ok_or(Error::EmptyEnsemble)?;
    let column = |f: &dyn Fn(&crate::dynamics::TrajectoryState) -> f64| sample_stats(&snap.samples.iter().map(f).collect::<Vec<_>>());
    Ok(SnapshotReduction {
        t: snap.t,
        mean_state: mean_state(snap.samples.iter().map(|s| &s.rho))?,
        m: (0..first.m.len()).map(|j| column(&|s| s.m[j])).collect::<Result<_>>()?,
        mu: (0..first.mu.len()).map(|k| column(&|s| s.mu[k])).collect::<Result<_>>()?,
        log_p: column(&|s| s.log_p)?,
        log_ratio: column(&|s| s.log_ratio())?,
        w: (0..first.w.len()).map(|j| column(&|s| s.w[j])).collect::<Result<_>>()?,
        counts: (0..first.counts.len()).map(|k| column(&|s| s.counts[k] as f64)).collect::<Result<_>>()?,
    })
}
