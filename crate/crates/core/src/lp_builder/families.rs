//! The constraint families of the bound programs, written once over any
//! coefficient type: symbolic for assembly, concrete for checking solved
//! certificates.

use crate::bias::CoefficientTable;
use crate::model::{PerturbationPair, Step};
use crate::piecewise::{CLinear, CLinearFn, Coefficient, TComponentId, TDomain, TLinear};

use super::ProblemKind;

/// A T-linear function required to be nonnegative, with a label naming
/// its family.
#[derive(Clone, Debug, PartialEq)]
pub struct Family<C> {
    pub label: String,
    pub function: TLinear<C>,
}

fn positive_part<T: crate::Scalar>(x: T) -> T {
    if x > T::zero() {
        x
    } else {
        T::zero()
    }
}

fn lift<C: Coefficient>(f: &CLinearFn<C::Scalar>) -> CLinear<C> {
    f.map(|&x| C::from_scalar(x))
}

/// `F(n + e_i) − F(n)` as a T-linear function.
fn reward_difference<C: Coefficient>(f: &CLinear<C>, i: usize) -> TLinear<C> {
    let mut d = TLinear::shift(f, Step::unit(i));
    d.add_scaled(-<C::Scalar as num_traits::One>::one(), &TLinear::embed(f));
    d
}

/// Sign-resolved bias bounds: for each `i`, the upper family
/// `B_i − ΔF_i − Σ_{j,u} max{−c A_j(·+u), c B_j(·+u)}` and the lower family
/// `A_i + ΔF_i − Σ_{j,u} max{c A_j(·+u), −c B_j(·+u)}`, with
/// `c = c_{i,k(n),j,u}`.
pub fn bias_bound_families<C: Coefficient>(
    table: &CoefficientTable<C::Scalar>,
    f: &CLinearFn<C::Scalar>,
    a: &[CLinear<C>; 2],
    b: &[CLinear<C>; 2],
) -> Vec<Family<C>> {
    let zero = <C::Scalar as num_traits::Zero>::zero();
    let one = <C::Scalar as num_traits::One>::one();
    let f = lift::<C>(f);
    let shifted = |g: &CLinear<C>| Step::ALL.map(|u| TLinear::shift(g, u));
    let sa = [shifted(&a[0]), shifted(&a[1])];
    let sb = [shifted(&b[0]), shifted(&b[1])];
    let mut out = Vec::with_capacity(4);
    for i in 1..=2 {
        let df = reward_difference(&f, i);
        let mut upper = TLinear::embed(&b[i - 1]);
        upper.add_scaled(-one, &df);
        let mut lower = TLinear::embed(&a[i - 1]);
        lower.add_scaled(one, &df);
        for j in 1..=2 {
            for u in Step::ALL {
                let c = |t: TComponentId| {
                    let k = t.c_component();
                    if k.allows(u) {
                        table.get(i, k, j, u)
                    } else {
                        zero
                    }
                };
                let pos = |t: TComponentId| positive_part(c(t));
                let neg = |t: TComponentId| positive_part(-c(t));
                let (au, bu) = (&sa[j - 1][u.index()], &sb[j - 1][u.index()]);
                upper.add_weighted(|t| -pos(t), bu);
                upper.add_weighted(|t| -neg(t), au);
                lower.add_weighted(|t| -pos(t), au);
                lower.add_weighted(|t| -neg(t), bu);
            }
        }
        out.push(Family { label: format!("bias-upper-{i}"), function: upper });
        out.push(Family { label: format!("bias-lower-{i}"), function: lower });
    }
    out
}

/// Bounds `(A_u, B_u)` with `−A_u ≤ D_u ≤ B_u` on `S ∩ (S − u)`, obtained by
/// splitting `u` into its horizontal and vertical parts.
pub fn direction_bounds<C: Coefficient>(a: &[CLinear<C>; 2], b: &[CLinear<C>; 2], u: Step) -> (TLinear<C>, TLinear<C>) {
    let one = <C::Scalar as num_traits::One>::one();
    let domain = TDomain::shifted(u);
    let mut au = TLinear::zero(domain);
    let mut bu = TLinear::zero(domain);
    let horizontal = Step::new(u.u1(), 0).expect("unit part of a step");
    match u.u1() {
        1 => {
            au.add_scaled(one, &TLinear::embed(&a[0]));
            bu.add_scaled(one, &TLinear::embed(&b[0]));
        }
        -1 => {
            au.add_scaled(one, &TLinear::shift(&b[0], Step::NEG_E1));
            bu.add_scaled(one, &TLinear::shift(&a[0], Step::NEG_E1));
        }
        _ => {}
    }
    match u.u2() {
        1 => {
            au.add_scaled(one, &TLinear::shift(&a[1], horizontal));
            bu.add_scaled(one, &TLinear::shift(&b[1], horizontal));
        }
        -1 => {
            au.add_scaled(one, &TLinear::shift(&b[1], u));
            bu.add_scaled(one, &TLinear::shift(&a[1], u));
        }
        _ => {}
    }
    (au, bu)
}

/// Directions `u ≠ 0` with `q_{k,u} ≠ 0` for some `k`.
pub fn perturbed_directions<T: crate::Scalar>(pair: &PerturbationPair<T>) -> Vec<Step> {
    pair.perturbed_directions()
}

/// Constraints tying `F̄` (and `G`) to the perturbation.
///
/// With `Δ = F̄ − F`, `M = Σ_u (q⁺ B_u + q⁻ A_u)` and `m = Σ_u (q⁺ A_u + q⁻ B_u)`
/// bracketing `Σ_u q_{k(n),u} D_u(n)` between `−m` and `M`:
/// error kinds impose `G − Δ − M ≥ 0` and `G + Δ − m ≥ 0`, the upper
/// comparison `Δ − m ≥ 0`, the lower comparison `−Δ − M ≥ 0`.
pub fn perturbation_families<C: Coefficient>(
    kind: ProblemKind,
    pair: &PerturbationPair<C::Scalar>,
    f: &CLinearFn<C::Scalar>,
    fbar: &CLinear<C>,
    g: Option<&CLinear<C>>,
    a: &[CLinear<C>; 2],
    b: &[CLinear<C>; 2],
) -> Vec<Family<C>> {
    let one = <C::Scalar as num_traits::One>::one();
    let mut delta = TLinear::embed(fbar);
    delta.add_scaled(-one, &TLinear::embed(&lift::<C>(f)));

    let mut big_m = TLinear::zero(TDomain::FULL);
    let mut small_m = TLinear::zero(TDomain::FULL);
    for u in perturbed_directions(pair) {
        let (au, bu) = direction_bounds(a, b, u);
        let q = |t: TComponentId| pair.q(t.c_component(), u);
        let qp = |t: TComponentId| positive_part(q(t));
        let qn = |t: TComponentId| positive_part(-q(t));
        big_m.add_weighted(qp, &bu);
        big_m.add_weighted(qn, &au);
        small_m.add_weighted(qp, &au);
        small_m.add_weighted(qn, &bu);
    }

    let combo = |parts: &[(C::Scalar, &TLinear<C>)]| {
        let mut h = TLinear::zero(TDomain::FULL);
        for &(w, p) in parts {
            h.add_scaled(w, p);
        }
        h
    };
    match (kind.is_comparison(), kind.is_upper()) {
        (false, _) => {
            let g = TLinear::embed(g.expect("error kinds carry G"));
            vec![
                Family { label: "error-upper".into(), function: combo(&[(one, &g), (-one, &delta), (-one, &big_m)]) },
                Family { label: "error-lower".into(), function: combo(&[(one, &g), (one, &delta), (-one, &small_m)]) },
            ]
        }
        (true, true) => vec![Family { label: "comparison".into(), function: combo(&[(one, &delta), (-one, &small_m)]) }],
        (true, false) => vec![Family { label: "comparison".into(), function: combo(&[(-one, &delta), (-one, &big_m)]) }],
    }
}
