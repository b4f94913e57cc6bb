use std::collections::BTreeSet;

use super::{k_bracket, CoefficientTable};
use crate::model::{ComponentId, RandomWalkSpec, Step};
use crate::Scalar;

/// Offset `w` relative to a state, possibly two steps away.
type Offset = (i64, i64);

fn as_step(w: Offset) -> Option<Step> {
    Step::new(w.0, w.1).ok()
}

fn in_n(k: ComponentId, w: Offset) -> Option<Step> {
    as_step(w).filter(|&u| k.allows(u))
}

/// Offsets `N_k ∪ (N_{k[1]} + e1) ∪ (N_{k[2]} + e2)` on which the flow
/// identity is checked.
pub fn check_points(k: ComponentId) -> Vec<Offset> {
    let mut set = BTreeSet::new();
    for &u in k.neighbors() {
        set.insert((u.u1(), u.u2()));
    }
    for (i, e) in [(1, (1, 0)), (2, (0, 1))] {
        for &u in k_bracket(i, k).neighbors() {
            set.insert((u.u1() + e.0, u.u2() + e.1));
        }
    }
    set.into_iter().collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionResidual<T> {
    pub i: usize,
    pub k: ComponentId,
    pub w: Offset,
    pub residual: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionReport<T> {
    pub max_residual: T,
    /// Residuals above the tolerance, in evaluation order.
    pub violations: Vec<AssumptionResidual<T>>,
    pub passed: bool,
}

fn coef<T: Scalar>(c: &CoefficientTable<T>, i: usize, k: ComponentId, j: usize, w: Offset) -> T {
    in_n(k, w).map_or(T::zero(), |u| c.get(i, k, j, u))
}

fn prob<T: Scalar>(walk: &RandomWalkSpec<T>, k: ComponentId, w: Offset) -> T {
    in_n(k, w).map_or(T::zero(), |u| walk.p(k, u))
}

/// Residual of the flow identity at `(i, k, w)`:
///
/// `Σ_j (c_{i,k,j,w−e_j} − c_{i,k,j,w}) − (p_{k[i],w−e_i} − p_{k,w})`,
/// each term present only when its offset lies in the relevant `N`.
pub fn residual<T: Scalar>(c: &CoefficientTable<T>, walk: &RandomWalkSpec<T>, i: usize, k: ComponentId, w: Offset) -> T {
    let minus = |w: Offset, j: usize| if j == 1 { (w.0 - 1, w.1) } else { (w.0, w.1 - 1) };
    let lhs = (1..=2).fold(T::zero(), |acc, j| acc + coef(c, i, k, j, minus(w, j)) - coef(c, i, k, j, w));
    let rhs = prob(walk, k_bracket(i, k), minus(w, i)) - prob(walk, k, w);
    lhs - rhs
}

/// Checks that `c` makes the bias recursion exact for `walk`.
pub fn verify_assumption<T: Scalar>(c: &CoefficientTable<T>, walk: &RandomWalkSpec<T>, tol: T) -> AssumptionReport<T> {
    let mut max_residual = T::zero();
    let mut violations = Vec::new();
    for i in 1..=2 {
        for k in ComponentId::ALL {
            for w in check_points(k) {
                let r = residual(c, walk, i, k, w);
                max_residual = max_residual.max(r.abs());
                if !(r.abs() <= tol) {
                    violations.push(AssumptionResidual { i, k, w, residual: r });
                }
            }
        }
    }
    AssumptionReport { max_residual, passed: violations.is_empty(), violations }
}
