//! Simulation of quantum continual measurements with diffusive and counting
//! channels, and estimation of the entropic measures of information they
//! extract: the quantum mutual entropy carried by a posteriori states, the
//! classical continual information gain `S_c(p_t‖q_t)`, and the analytic
//! upper bound on its time derivative.
//!
//! The crate is organised bottom-up:
//!
//! * [`algebra`]: dense complex operators, Hermitian eigendecomposition and
//!   entropy primitives.
//! * [`model`]: measurement models (Hamiltonian, unmonitored dissipators,
//!   diffusive and counting channels) on a piecewise-constant schedule.
//! * [`dynamics`]: the master equation, the linear and nonlinear trajectory
//!   SDEs and pathwise log-densities.
//! * [`ensemble`]: reproducible Monte Carlo orchestration.
//! * [`information`]: the information estimators and the derivative bound.
//! * [`report`]: CSV and JSON output formats.
//!
//! All entropies are in nats.

pub mod algebra;
pub mod dynamics;
pub mod ensemble;
mod error;
pub mod information;
pub mod model;
pub mod report;

pub use error::{Error, Result};
