//! Dense linear-programming solver and LP-format export.

mod export;
mod program;
mod simplex;

pub use export::export_lp_text;
pub use program::{Constraint, LinearProgram, Relation, Sense, Variable};
pub use simplex::{solve, Diagnostics, Solution, Status, ACCEPT_TOL, FEASIBILITY_TOL, OPTIMALITY_TOL, PIVOT_TOL};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("coefficient references undeclared variable {0}")]
    UnknownVariable(usize),
    #[error("non-finite data in {0}")]
    NonFinite(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::VarId;

    fn one_var() -> LinearProgram<f64> {
        let mut lp = LinearProgram::new();
        let x = lp.add_free("x");
        lp.add_constraint([(x, 1.0)], Relation::Ge, 3.0);
        lp.set_objective(Sense::Minimize, [(x, 1.0)], 0.0);
        lp
    }

    #[test]
    fn one_variable_lp() {
        let sol = solve(&one_var());
        assert_eq!(sol.status, Status::Optimal);
        assert!((sol.values[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_feasible_set() {
        let mut lp = LinearProgram::<f64>::new();
        let x = lp.add_free("x");
        lp.add_constraint([(x, 1.0)], Relation::Ge, 1.0);
        lp.add_constraint([(x, 1.0)], Relation::Le, 0.0);
        lp.set_objective(Sense::Minimize, [(x, 1.0)], 0.0);
        let sol = solve(&lp);
        assert_eq!(sol.status, Status::Infeasible);
        assert!(sol.diagnostics.phase1_objective > 1e-9);
    }

    #[test]
    fn simplex_triangle() {
        let mut lp = LinearProgram::<f64>::new();
        let x = lp.add_nonnegative("x");
        let y = lp.add_nonnegative("y");
        lp.add_constraint([(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
        lp.set_objective(Sense::Minimize, [(x, -1.0), (y, -1.0)], 0.0);
        let sol = solve(&lp);
        assert_eq!(sol.status, Status::Optimal);
        assert!((sol.objective.unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = LinearProgram::<f64>::new();
        let x = lp.add_free("x");
        lp.add_constraint([(x, 1.0)], Relation::Ge, 0.0);
        lp.set_objective(Sense::Maximize, [(x, 1.0)], 0.0);
        assert_eq!(solve(&lp).status, Status::Unbounded);
    }

    #[test]
    fn equality_and_bounds() {
        // max 2x + y  s.t. x + y = 4, x <= 3, y >= 0.5, x >= -1
        let mut lp = LinearProgram::<f64>::new();
        let x = lp.add_variable("x", Some(-1.0));
        let y = lp.add_nonnegative("y");
        lp.add_constraint([(x, 1.0), (y, 1.0)], Relation::Eq, 4.0);
        lp.add_constraint([(x, 1.0)], Relation::Le, 3.0);
        lp.add_constraint([(y, 2.0)], Relation::Ge, 1.0);
        lp.set_objective(Sense::Maximize, [(x, 2.0), (y, 1.0)], 0.5);
        let sol = solve(&lp);
        assert_eq!(sol.status, Status::Optimal);
        assert!((sol.objective.unwrap() - 7.5).abs() < 1e-12);
        assert_eq!(sol.diagnostics.row_scales.len(), 3);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::<f64>::new();
        let x = lp.add_nonnegative("x");
        let y = lp.add_nonnegative("y");
        lp.add_constraint([(x, 1.0), (y, 1.0)], Relation::Eq, 2.0);
        lp.add_constraint([(x, 2.0), (y, 2.0)], Relation::Eq, 4.0);
        lp.set_objective(Sense::Minimize, [(x, 1.0), (y, 3.0)], 0.0);
        let sol = solve(&lp);
        assert_eq!(sol.status, Status::Optimal);
        assert!((sol.objective.unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn undeclared_variable_rejected() {
        let mut lp = LinearProgram::<f64>::new();
        lp.add_constraint([(VarId(4), 1.0)], Relation::Ge, 0.0);
        assert_eq!(solve(&lp).status, Status::NumericalFailure);
    }

    #[test]
    fn export_format() {
        let text = export_lp_text(&one_var());
        assert!(text.contains("c1: 1 x >= 3"), "{text}");
        assert!(text.contains(" x free"));
        let mut lp = LinearProgram::<f64>::new();
        lp.add_nonnegative("y");
        let text = export_lp_text(&lp);
        assert!(text.contains("Bounds\n y >= 0\nEnd"), "{text}");
        assert_eq!(num_check(), "1e-7");
    }

    fn num_check() -> String {
        export::num_for_tests(1e-7)
    }

    #[test]
    fn deterministic() {
        let a = solve(&one_var());
        let b = solve(&one_var());
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}
