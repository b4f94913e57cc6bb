use std::collections::BTreeMap;
use std::fmt;

use crate::Scalar;

/// Index of an LP decision variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// Coefficients with magnitude below this are dropped.
pub const DROP_TOL: f64 = 1e-15;

/// `constant + Σ coef · x_var`, kept canonical: no entry with
/// `|coef| < DROP_TOL`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct AffineExpr<T> {
    constant: T,
    terms: BTreeMap<VarId, T>,
}

impl<T: Scalar> AffineExpr<T> {
    pub fn constant(c: T) -> Self {
        AffineExpr { constant: c, terms: BTreeMap::new() }
    }

    pub fn var(v: VarId) -> Self {
        Self::term(v, T::one())
    }

    pub fn term(v: VarId, coef: T) -> Self {
        let mut e = Self::constant(T::zero());
        e.add_term(v, coef);
        e
    }

    pub fn constant_part(&self) -> T {
        self.constant
    }

    pub fn terms(&self) -> impl Iterator<Item = (VarId, T)> + '_ {
        self.terms.iter().map(|(&v, &c)| (v, c))
    }

    pub fn coef(&self, v: VarId) -> T {
        self.terms.get(&v).copied().unwrap_or_else(T::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_constant(&mut self, c: T) {
        self.constant = self.constant + c;
    }

    pub fn add_term(&mut self, v: VarId, coef: T) {
        let drop = T::lit(DROP_TOL);
        let entry = self.terms.entry(v).or_insert_with(T::zero);
        *entry = *entry + coef;
        if entry.abs() < drop {
            self.terms.remove(&v);
        }
    }

    /// `self += a · other`.
    pub fn axpy(&mut self, a: T, other: &Self) {
        if a == T::zero() {
            return;
        }
        self.constant = self.constant + a * other.constant;
        for (&v, &c) in &other.terms {
            self.add_term(v, a * c);
        }
    }

    pub fn scaled(&self, a: T) -> Self {
        let mut out = Self::constant(T::zero());
        out.axpy(a, self);
        out
    }

    /// Value at `x`, indexed by `VarId`.
    pub fn eval(&self, x: &[T]) -> T {
        self.terms.iter().fold(self.constant, |acc, (v, &c)| acc + c * x[v.0])
    }
}

impl<T: Scalar> fmt::Display for AffineExpr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.constant)?;
        for (v, c) in &self.terms {
            if *c < T::zero() {
                write!(f, " - {} {v}", c.abs())?;
            } else {
                write!(f, " + {c} {v}")?;
            }
        }
        Ok(())
    }
}

/// Coefficient type of piecewise-linear functions: a plain scalar for
/// concrete functions, an [`AffineExpr`] for symbolic ones.
pub trait Coefficient: Clone + fmt::Debug + PartialEq {
    type Scalar: Scalar;

    fn zero() -> Self;
    fn from_scalar(c: Self::Scalar) -> Self;
    /// `self += a · x`.
    fn axpy(&mut self, a: Self::Scalar, x: &Self);

    fn scaled(&self, a: Self::Scalar) -> Self {
        let mut out = Self::zero();
        out.axpy(a, self);
        out
    }

    fn plus(&self, x: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(num_traits::One::one(), x);
        out
    }
}

impl<T: Scalar> Coefficient for T {
    type Scalar = T;

    fn zero() -> Self {
        T::zero()
    }

    fn from_scalar(c: T) -> Self {
        c
    }

    fn axpy(&mut self, a: T, x: &Self) {
        *self = *self + a * *x;
    }
}

impl<T: Scalar> Coefficient for AffineExpr<T> {
    type Scalar = T;

    fn zero() -> Self {
        AffineExpr::constant(T::zero())
    }

    fn from_scalar(c: T) -> Self {
        AffineExpr::constant(c)
    }

    fn axpy(&mut self, a: T, x: &Self) {
        AffineExpr::axpy(self, a, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation_drops_terms() {
        let mut e = AffineExpr::<f64>::var(VarId(3));
        e.axpy(-1.0, &AffineExpr::term(VarId(3), 1.0 + 1e-16));
        assert!(e.is_constant());
        assert_eq!(e.coef(VarId(3)), 0.0);
    }

    #[test]
    fn evaluation() {
        let mut e = AffineExpr::<f64>::constant(1.5);
        e.add_term(VarId(0), 2.0);
        e.add_term(VarId(2), -1.0);
        assert_eq!(e.eval(&[1.0, 100.0, 4.0]), -0.5);
        assert_eq!(e.to_string(), "1.5 + 2 x0 - 1 x2");
    }
}
