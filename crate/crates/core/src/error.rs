use thiserror::Error;

use crate::model::Diagnostic;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operator is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("operator has non-finite entries")]
    NonFinite,

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("state is rank deficient at t = {t}: eigenvalue {eigenvalue:.3e} is below {floor:.1e}")]
    RankDeficient { eigenvalue: f64, floor: f64, t: f64 },

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid model ({} diagnostics): {}", .0.len(), .0.first().map(|d| d.to_string()).unwrap_or_default())]
    InvalidModel(Vec<Diagnostic>),

    #[error("time {t} outside model horizon [0, {horizon}]")]
    OutOfHorizon { t: f64, horizon: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("non-physical state at t = {t}: positivity clipping removed {clipped:.3e} in trace norm")]
    NonPhysicalState { t: f64, clipped: f64 },

    #[error("jump intensity overflow at t = {t}: channel {channel} has mu*dt = {product:.3}")]
    IntensityOverflow { t: f64, channel: usize, product: f64 },

    #[error("trace of the linear solution collapsed at t = {t} (ln p = {log_p:.1})")]
    TraceCollapse { t: f64, log_p: f64 },

    #[error("ensemble is empty")]
    EmptyEnsemble,

    #[error("intensity mismatch at t = {t}: channel {channel} has mu = {mu:.3e} but nu = {nu:.3e}")]
    IntensityMismatch { t: f64, channel: usize, mu: f64, nu: f64 },

    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),

    #[error("trajectory {stream} failed: {source}")]
    Trajectory {
        stream: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Attach the simulation time to errors that carry one.
    pub(crate) fn at_time(self, time: f64) -> Self {
        match self {
            Error::RankDeficient { eigenvalue, floor, .. } => Error::RankDeficient { eigenvalue, floor, t: time },
            other => other,
        }
    }
}
