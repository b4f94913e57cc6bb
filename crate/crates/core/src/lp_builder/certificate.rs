use serde_json::{json, Value};

use super::assemble::{evaluate_layout, BoundProblem};
use super::{BuildError, FunctionShape, ProblemKind};
use crate::lp_solver::{Solution, Status};
use crate::model::GeometricProductForm;
use crate::piecewise::CLinearFn;
use crate::Scalar;

/// Agreement required between the solver objective and the bound
/// recomputed from the certificate's functions.
pub const RECOMPUTE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct LpStats {
    pub variables: usize,
    pub constraints: usize,
    pub status: Status,
    pub iterations: usize,
}

/// Solved functions witnessing a bound.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundCertificate<T> {
    pub kind: ProblemKind,
    pub shape: FunctionShape,
    pub r: GeometricProductForm<T>,
    pub bound: T,
    pub fbar: CLinearFn<T>,
    /// Error function; absent for comparison kinds.
    pub g: Option<CLinearFn<T>>,
    pub a: [CLinearFn<T>; 2],
    pub b: [CLinearFn<T>; 2],
    pub lp_stats: LpStats,
}

impl<T: Scalar> BoundCertificate<T> {
    /// `Σ π̄ (F̄ ± G)` or `Σ π̄ F̄`, from the stored functions.
    pub fn recomputed_bound(&self) -> T {
        let base = self.fbar.expectation(&self.r);
        match &self.g {
            Some(g) if self.kind.is_upper() => base + g.expectation(&self.r),
            Some(g) => base - g.expectation(&self.r),
            None => base,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": self.kind.key(),
            "shape": self.shape.key(),
            "bound": self.bound.to_f64_lossy(),
            "r": [self.r.r1().to_f64_lossy(), self.r.r2().to_f64_lossy()],
            "Fbar": self.fbar.to_json(),
            "G": self.g.as_ref().map(|g| g.to_json()),
            "A1": self.a[0].to_json(),
            "A2": self.a[1].to_json(),
            "B1": self.b[0].to_json(),
            "B2": self.b[1].to_json(),
            "lp": {
                "variables": self.lp_stats.variables,
                "constraints": self.lp_stats.constraints,
                "status": self.lp_stats.status.name(),
                "iterations": self.lp_stats.iterations,
            },
        })
    }
}

pub fn lp_stats<T: Scalar>(problem: &BoundProblem<T>, solution: &Solution<T>) -> LpStats {
    LpStats {
        variables: problem.lp.num_variables(),
        constraints: problem.lp.num_constraints(),
        status: solution.status,
        iterations: solution.diagnostics.phase1_iterations + solution.diagnostics.phase2_iterations,
    }
}

/// Reads the solved functions off an optimal solution.
pub fn extract_certificate<T: Scalar>(problem: &BoundProblem<T>, solution: &Solution<T>) -> Result<BoundCertificate<T>, BuildError> {
    if solution.status != Status::Optimal {
        return Err(BuildError::NotOptimal(solution.status));
    }
    let (fbar, g, a, b) = evaluate_layout(&problem.layout, &solution.values);
    let cert = BoundCertificate {
        kind: problem.kind,
        shape: problem.shape,
        r: problem.r,
        bound: solution.objective.expect("optimal solutions carry an objective"),
        fbar,
        g,
        a,
        b,
        lp_stats: lp_stats(problem, solution),
    };
    let again = cert.recomputed_bound();
    let scale = T::one().max(cert.bound.abs());
    if (again - cert.bound).abs() > T::lit(RECOMPUTE_TOL) * scale {
        return Err(BuildError::InconsistentCertificate(cert.bound.to_f64_lossy(), again.to_f64_lossy()));
    }
    Ok(cert)
}
