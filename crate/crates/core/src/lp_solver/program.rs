use std::fmt;

use super::LpError;
use crate::piecewise::{AffineExpr, VarId};
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable<T> {
    pub name: String,
    /// `None` for a free variable.
    pub lower: Option<T>,
}

/// `Σ coef · x_var  relation  rhs`, coefficients sorted by variable.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint<T> {
    pub coeffs: Vec<(VarId, T)>,
    pub relation: Relation,
    pub rhs: T,
}

impl<T: Scalar> Constraint<T> {
    pub fn activity(&self, x: &[T]) -> T {
        self.coeffs.iter().map(|&(v, c)| c * x[v.0]).sum()
    }

    /// Amount by which `x` violates the row (zero when satisfied).
    pub fn violation(&self, x: &[T]) -> T {
        let a = self.activity(x);
        let zero = T::zero();
        match self.relation {
            Relation::Le => (a - self.rhs).max(zero),
            Relation::Ge => (self.rhs - a).max(zero),
            Relation::Eq => (a - self.rhs).abs(),
        }
    }
}

/// A finite linear program over named variables. Not mutated once solved.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram<T> {
    variables: Vec<Variable<T>>,
    constraints: Vec<Constraint<T>>,
    objective: Vec<(VarId, T)>,
    objective_constant: T,
    sense: Sense,
}

impl<T: Scalar> Default for LinearProgram<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new() -> Self {
        LinearProgram {
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            objective_constant: T::zero(),
            sense: Sense::Minimize,
        }
    }

    pub fn add_variable(&mut self, name: impl Into<String>, lower: Option<T>) -> VarId {
        self.variables.push(Variable { name: name.into(), lower });
        VarId(self.variables.len() - 1)
    }

    pub fn add_free(&mut self, name: impl Into<String>) -> VarId {
        self.add_variable(name, None)
    }

    pub fn add_nonnegative(&mut self, name: impl Into<String>) -> VarId {
        self.add_variable(name, Some(T::zero()))
    }

    /// Adds `Σ coeffs  relation  rhs`; repeated variables are merged and
    /// zero coefficients dropped.
    pub fn add_constraint(&mut self, coeffs: impl IntoIterator<Item = (VarId, T)>, relation: Relation, rhs: T) {
        self.constraints.push(Constraint { coeffs: canonical(coeffs), relation, rhs });
    }

    /// Adds `expr  relation  0`, moving the constant to the right-hand side.
    pub fn add_affine(&mut self, expr: &AffineExpr<T>, relation: Relation) {
        self.add_constraint(expr.terms(), relation, -expr.constant_part());
    }

    pub fn set_objective(&mut self, sense: Sense, coeffs: impl IntoIterator<Item = (VarId, T)>, constant: T) {
        self.sense = sense;
        self.objective = canonical(coeffs);
        self.objective_constant = constant;
    }

    pub fn set_affine_objective(&mut self, sense: Sense, expr: &AffineExpr<T>) {
        self.set_objective(sense, expr.terms(), expr.constant_part());
    }

    pub fn variables(&self) -> &[Variable<T>] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint<T>] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(VarId, T)] {
        &self.objective
    }

    pub fn objective_constant(&self) -> T {
        self.objective_constant
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective_value(&self, x: &[T]) -> T {
        self.objective.iter().fold(self.objective_constant, |acc, &(v, c)| acc + c * x[v.0])
    }

    /// Largest constraint or bound violation of `x`.
    pub fn max_violation(&self, x: &[T]) -> T {
        let rows = self.constraints.iter().map(|c| c.violation(x));
        let bounds = self.variables.iter().zip(x).map(|(v, &xi)| v.lower.map_or(T::zero(), |l| (l - xi).max(T::zero())));
        rows.chain(bounds).fold(T::zero(), T::max)
    }

    /// Checks that every coefficient references a declared variable and all
    /// data are finite.
    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.variables.len();
        let check = |coeffs: &[(VarId, T)], what: &str| -> Result<(), LpError> {
            for &(v, c) in coeffs {
                if v.0 >= n {
                    return Err(LpError::UnknownVariable(v.0));
                }
                if !c.is_finite() {
                    return Err(LpError::NonFinite(what.to_string()));
                }
            }
            Ok(())
        };
        check(&self.objective, "objective")?;
        if !self.objective_constant.is_finite() {
            return Err(LpError::NonFinite("objective".into()));
        }
        for (i, row) in self.constraints.iter().enumerate() {
            check(&row.coeffs, &format!("c{}", i + 1))?;
            if !row.rhs.is_finite() {
                return Err(LpError::NonFinite(format!("c{}", i + 1)));
            }
        }
        for v in &self.variables {
            if v.lower.is_some_and(|l| !l.is_finite()) {
                return Err(LpError::NonFinite(v.name.clone()));
            }
        }
        Ok(())
    }
}

fn canonical<T: Scalar>(coeffs: impl IntoIterator<Item = (VarId, T)>) -> Vec<(VarId, T)> {
    let mut v: Vec<(VarId, T)> = coeffs.into_iter().collect();
    v.sort_by_key(|&(id, _)| id);
    let mut out: Vec<(VarId, T)> = Vec::with_capacity(v.len());
    for (id, c) in v {
        match out.last_mut() {
            Some((last, acc)) if *last == id => *acc = *acc + c,
            _ => out.push((id, c)),
        }
    }
    out.retain(|&(_, c)| c != T::zero());
    out
}
