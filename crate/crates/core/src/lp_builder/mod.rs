//! Finite linear programs whose optima are certified bounds on
//! steady-state performance, and the certificates read off their
//! solutions.

mod assemble;
mod certificate;
mod families;
mod kind;
mod manual;

pub use assemble::{assemble, evaluate_layout, BoundProblem, Layout, LayoutValues, RowOrigin, STATIONARITY_TOL};
pub use certificate::{extract_certificate, lp_stats, BoundCertificate, LpStats, RECOMPUTE_TOL};
pub use families::{bias_bound_families, direction_bounds, perturbation_families, Family};
pub use kind::{FunctionShape, ProblemKind};
pub use manual::manual_prop4_bounds;

use thiserror::Error;

use crate::lp_solver::{self, Status};
use crate::model::{GeometricProductForm, PerturbationPair, Step};
use crate::piecewise::CLinearFn;
use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error("{kind} requires perturbations along unit steps only, but q is nonzero along {step}")]
    KindRestrictionViolated { kind: ProblemKind, step: Step },
    #[error("product form is not stationary for the perturbed walk (residual {0:e})")]
    InvalidProductForm(f64),
    #[error("solver status {}", .0.name())]
    NotOptimal(Status),
    #[error("certificate bound {0} disagrees with recomputed {1}")]
    InconsistentCertificate(f64, f64),
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("{0}")]
    Precondition(String),
}

/// Result of assembling and solving one bound program.
#[derive(Clone, Debug)]
pub struct BoundOutcome<T> {
    pub kind: ProblemKind,
    pub shape: FunctionShape,
    pub stats: LpStats,
    /// Present exactly when the program was solved to optimality.
    pub certificate: Option<BoundCertificate<T>>,
}

impl<T: Scalar> BoundOutcome<T> {
    pub fn bound(&self) -> Option<T> {
        self.certificate.as_ref().map(|c| c.bound)
    }
}

/// Assembles, solves and extracts in one go.
pub fn solve_bound<T: Scalar>(
    kind: ProblemKind,
    pair: &PerturbationPair<T>,
    r: &GeometricProductForm<T>,
    f: &CLinearFn<T>,
    shape: FunctionShape,
) -> Result<BoundOutcome<T>, BuildError> {
    let problem = assemble(kind, pair, r, f, shape)?;
    let solution = lp_solver::solve(&problem.lp);
    let stats = lp_stats(&problem, &solution);
    let certificate = match solution.status {
        Status::Optimal => Some(extract_certificate(&problem, &solution)?),
        _ => None,
    };
    Ok(BoundOutcome { kind, shape, stats, certificate })
}

#[cfg(test)]
mod tests;
