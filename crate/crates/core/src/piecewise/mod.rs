//! Componentwise-linear functions on the C- and T-partitions of the quarter
//! plane, with symbolic coefficients for LP assembly.

mod affine;
mod clinear;
mod tlinear;

pub use affine::{AffineExpr, Coefficient, VarId, DROP_TOL};
pub use clinear::{expectation_weights, CLinear, CLinearFn, Slot};
pub use tlinear::{NonnegRow, RowKind, TComponentId, TDomain, TLinear, TLinearFn};

use thiserror::Error;

use crate::model::Point;

/// C-linear function with affine coefficients in LP variables.
pub type CLinearSymbolic<T> = CLinear<AffineExpr<T>>;
/// T-linear function with affine coefficients in LP variables.
pub type TLinearSymbolic<T> = TLinear<AffineExpr<T>>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PiecewiseError {
    #[error("point {0} outside the function's domain")]
    OutOfDomain(Point),
    #[error("measure: {0}")]
    Json(String),
}
