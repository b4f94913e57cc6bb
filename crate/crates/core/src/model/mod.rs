//! Quarter-plane random walks: lattice steps, the four-component partition
//! of the state space, transition kernels, perturbations and geometric
//! product forms.

mod families;
mod json;
mod product_form;
mod step;
mod walk;

pub use families::{
    coupled_processors, joint_departures, CoupledProcessors, Family, JointDepartures, PerturbationRule,
};
pub use json::{parse_model, ModelDoc};
pub use product_form::{
    solve_rate_pair, solve_rate_pairs, verify_geometric_stationarity, GeometricProductForm, StationarityCheck,
};
pub use step::{component_of, ComponentId, Point, Step};
pub use walk::{PerturbationPair, RandomWalkSpec, ValidationReport, Violation, ROW_SUM_TOL};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("step ({0},{1}) is not a nearest-neighbour direction")]
    InvalidStep(i64, i64),
    #[error("point {0} lies outside the quarter plane")]
    OutsideQuarterPlane(Point),
    #[error("invalid walk: {0}")]
    InvalidWalk(String),
    #[error("invalid parameters: {0}")]
    Parameters(String),
    #[error("no geometric product form with rates in (0,1)^2")]
    NoProductForm,
    #[error("several verified product-form roots: {0:?}")]
    MultipleRoots(Vec<(f64, f64)>),
    #[error("product-form rates ({0}, {1}) not in the open unit square")]
    InvalidProductForm(f64, f64),
    #[error("model file: {0}")]
    Json(String),
}
