//! Brute-force reference values: stationary distributions of truncated
//! chains, finite-horizon rewards and bias terms, and certificate checks.

mod bias;
mod certificate;
mod grid;
mod stationary;

pub use bias::{bias_field, BiasField, ValueIteration};
pub use certificate::{check_certificate, CertificateReport, Condition, Margin, CERTIFICATE_TOL};
pub use grid::Grid;
pub use stationary::{
    stationary_from, stationary_truncated, steady_state_value, steady_state_value_from, SteadyStateValue,
    TruncatedDistribution, MAX_SWEEPS, MAX_TRUNCATION,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("no convergence on [0,{m}]^2 after {sweeps} sweeps")]
    NotConverged { m: usize, sweeps: usize },
    #[error("steady-state value not settled up to truncation level {m}")]
    TruncationLimit { m: usize },
    #[error("horizon {t} leaves no safe region on [0,{m}]^2")]
    HorizonTooLong { t: usize, m: usize },
}
