//! Constants that express next-step bias terms linearly in current ones,
//! and the checks that make that recursion trustworthy.

mod assumption;
mod recursion;
mod table;

pub use assumption::{check_points, residual, verify_assumption, AssumptionReport, AssumptionResidual};
pub use recursion::{recursion_check, recursion_rhs, RecursionReport, RECURSION_TOL};
pub use table::{k_bracket, CoefficientTable};

#[cfg(test)]
mod tests;
