use super::families::{bias_bound_families, perturbation_families, Family};
use super::{BuildError, FunctionShape, ProblemKind};
use crate::bias::CoefficientTable;
use crate::model::{verify_geometric_stationarity, GeometricProductForm, PerturbationPair};
use crate::lp_solver::{LinearProgram, Relation, Sense};
use crate::piecewise::{AffineExpr, CLinear, CLinearFn, CLinearSymbolic, RowKind, Slot, TComponentId, TLinear};
use crate::Scalar;

/// Tolerance for the stationarity of `π̄` under the perturbed walk.
pub const STATIONARITY_TOL: f64 = 1e-9;

/// The unknown functions of a bound program as affine expressions in its
/// variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout<T> {
    pub fbar: CLinearSymbolic<T>,
    pub g: Option<CLinearSymbolic<T>>,
    pub a: [CLinearSymbolic<T>; 2],
    pub b: [CLinearSymbolic<T>; 2],
}

/// Where a constraint row came from.
#[derive(Clone, Debug, PartialEq)]
pub struct RowOrigin {
    pub family: String,
    pub t: TComponentId,
    pub kind: RowKind,
}

/// A finite bound program ready to solve.
#[derive(Clone, Debug)]
pub struct BoundProblem<T> {
    pub kind: ProblemKind,
    pub shape: FunctionShape,
    pub r: GeometricProductForm<T>,
    pub lp: LinearProgram<T>,
    pub layout: Layout<T>,
    /// One entry per LP row.
    pub rows: Vec<RowOrigin>,
}

impl<T: Scalar> BoundProblem<T> {
    /// Number of variables describing the unknown functions.
    pub fn function_variables(&self) -> usize {
        self.lp.num_variables()
    }
}

fn clinear_vars<T: Scalar>(lp: &mut LinearProgram<T>, name: &str) -> CLinearSymbolic<T> {
    CLinear::from_slots(Slot::ALL.map(|s| AffineExpr::var(lp.add_free(format!("{name}_{}", s.key())))))
}

fn shaped_vars<T: Scalar>(lp: &mut LinearProgram<T>, name: &str, shape: FunctionShape) -> CLinearSymbolic<T> {
    match shape {
        FunctionShape::CLinear => clinear_vars(lp, name),
        FunctionShape::GlobalLinear => {
            let c = AffineExpr::var(lp.add_free(format!("{name}_c")));
            let s1 = AffineExpr::var(lp.add_free(format!("{name}_n1")));
            let s2 = AffineExpr::var(lp.add_free(format!("{name}_n2")));
            // Slot order: f10 f11 f20 f22 f30 f40 f41 f42.
            CLinear::from_slots([c.clone(), s1.clone(), c.clone(), s2.clone(), c.clone(), c, s1, s2])
        }
        FunctionShape::Constant => {
            let c = AffineExpr::var(lp.add_free(format!("{name}_c")));
            let z = AffineExpr::constant(T::zero());
            CLinear::from_slots([c.clone(), z.clone(), c.clone(), z.clone(), c.clone(), c, z.clone(), z])
        }
    }
}

fn push_family<T: Scalar>(lp: &mut LinearProgram<T>, rows: &mut Vec<RowOrigin>, family: &str, h: &TLinear<AffineExpr<T>>) {
    for row in h.nonneg_inequalities() {
        lp.add_affine(&row.expr, Relation::Ge);
        rows.push(RowOrigin { family: family.to_string(), t: row.t, kind: row.kind });
    }
}

fn push_families<T: Scalar>(lp: &mut LinearProgram<T>, rows: &mut Vec<RowOrigin>, families: Vec<Family<AffineExpr<T>>>) {
    for fam in families {
        push_family(lp, rows, &fam.label, &fam.function);
    }
}

/// Assembles the finite bound program of the given kind.
///
/// Every per-state constraint family is compiled to finitely many
/// inequalities through the T-partition; the bias-bound terms are resolved
/// by the sign of their coefficient, which is valid because `A_i, B_i ≥ 0`
/// is imposed.
pub fn assemble<T: Scalar>(
    kind: ProblemKind,
    pair: &PerturbationPair<T>,
    r: &GeometricProductForm<T>,
    f: &CLinearFn<T>,
    shape: FunctionShape,
) -> Result<BoundProblem<T>, BuildError> {
    if kind.unit_steps_only() {
        if let Some(u) = pair.perturbed_directions().into_iter().find(|u| !u.is_unit_or_zero()) {
            return Err(BuildError::KindRestrictionViolated { kind, step: u });
        }
    }
    let check = verify_geometric_stationarity(&pair.perturbed, r, T::lit(STATIONARITY_TOL));
    if !check.passed {
        return Err(BuildError::InvalidProductForm(check.max_residual.to_f64_lossy()));
    }

    let mut lp = LinearProgram::new();
    let fbar = clinear_vars(&mut lp, "Fbar");
    let g = kind.has_error_term().then(|| clinear_vars(&mut lp, "G"));
    let a = [shaped_vars(&mut lp, "A1", shape), shaped_vars(&mut lp, "A2", shape)];
    let b = [shaped_vars(&mut lp, "B1", shape), shaped_vars(&mut lp, "B2", shape)];

    let mut rows = Vec::new();
    push_family(&mut lp, &mut rows, "nonneg-Fbar", &TLinear::embed(&fbar));
    if let Some(g) = &g {
        push_family(&mut lp, &mut rows, "nonneg-G", &TLinear::embed(g));
    }
    for (name, h) in [("nonneg-A1", &a[0]), ("nonneg-A2", &a[1]), ("nonneg-B1", &b[0]), ("nonneg-B2", &b[1])] {
        push_family(&mut lp, &mut rows, name, &TLinear::embed(h));
    }
    let table = CoefficientTable::from_table1(&pair.original);
    push_families(&mut lp, &mut rows, bias_bound_families(&table, f, &a, &b));
    push_families(&mut lp, &mut rows, perturbation_families(kind, pair, f, &fbar, g.as_ref(), &a, &b));

    let mut objective = fbar.expectation(r);
    if let Some(g) = &g {
        let eg = g.expectation(r);
        objective.axpy(if kind.is_upper() { T::one() } else { -T::one() }, &eg);
    }
    let sense = if kind.is_upper() { Sense::Minimize } else { Sense::Maximize };
    lp.set_affine_objective(sense, &objective);

    Ok(BoundProblem { kind, shape, r: *r, lp, layout: Layout { fbar, g, a, b }, rows })
}

/// `(F̄, G, A, B)` evaluated at an LP point.
pub type LayoutValues<T> = (CLinearFn<T>, Option<CLinearFn<T>>, [CLinearFn<T>; 2], [CLinearFn<T>; 2]);

/// Values of the layout's functions at an LP point.
pub fn evaluate_layout<T: Scalar>(layout: &Layout<T>, x: &[T]) -> LayoutValues<T> {
    let ev = |h: &CLinearSymbolic<T>| h.map(|e| e.eval(x));
    (
        ev(&layout.fbar),
        layout.g.as_ref().map(ev),
        [ev(&layout.a[0]), ev(&layout.a[1])],
        [ev(&layout.b[0]), ev(&layout.b[1])],
    )
}
