use super::*;
use crate::model::{coupled_processors, joint_departures, ComponentId, RandomWalkSpec, Step};
use crate::oracle::ValueIteration;
use crate::piecewise::CLinearFn;

fn jd() -> RandomWalkSpec<f64> {
    joint_departures(0.1_f64, 0.1, 0.8, 0.32, 0.32).unwrap()
}

#[test]
fn bracket_examples() {
    assert_eq!(k_bracket(1, ComponentId::Vertical), ComponentId::Interior);
    assert_eq!(k_bracket(2, ComponentId::Origin), ComponentId::Vertical);
    assert_eq!(k_bracket(1, ComponentId::Interior), ComponentId::Interior);
}

#[test]
fn interior_rows_copy_kernel() {
    let w = coupled_processors(0.2_f64, 0.2, 0.3, 0.3, 0.25, 0.35).unwrap();
    let c = CoefficientTable::from_table1(&w);
    for u in Step::ALL {
        assert_eq!(c.get(1, ComponentId::Interior, 1, u), w.p(ComponentId::Interior, u));
        assert_eq!(c.get(1, ComponentId::Interior, 2, u), 0.0);
    }
    let w = jd();
    let c = CoefficientTable::from_table1(&w);
    for &u in ComponentId::Horizontal.neighbors() {
        assert_eq!(c.get(1, ComponentId::Horizontal, 1, u), w.p(ComponentId::Horizontal, u));
    }
}

#[test]
fn chained_entry_satisfies_identity() {
    let w = jd();
    let c = CoefficientTable::from_table1(&w);
    let expect = w.p(ComponentId::Interior, Step::NEG_E1) - w.p(ComponentId::Vertical, Step::ZERO)
        + c.get(1, ComponentId::Vertical, 2, Step::ZERO)
        + c.get(1, ComponentId::Vertical, 1, Step::ZERO);
    assert_eq!(c.get(1, ComponentId::Vertical, 2, Step::NEG_E2), expect);
    assert!(verify_assumption(&c, &w, 1e-12).passed);
}

#[test]
fn defects_detected() {
    let w = jd();
    let mut c = CoefficientTable::from_table1(&w);
    let old = c.get(2, ComponentId::Horizontal, 2, Step::E1);
    c.set(2, ComponentId::Horizontal, 2, Step::E1, old + 0.01);
    let report = verify_assumption(&c, &w, 1e-12);
    assert!(!report.passed);
    assert!((report.max_residual - 0.01).abs() < 1e-12);
    assert!(report.violations.iter().all(|v| v.i == 2 && v.k == ComponentId::Horizontal));
    assert!(!verify_assumption(&CoefficientTable::zero(), &w, 1e-12).passed);
}

#[test]
fn check_point_sets() {
    assert_eq!(check_points(ComponentId::Interior).len(), 15);
    assert!(check_points(ComponentId::Origin).contains(&(1, 1)));
    assert!(check_points(ComponentId::Origin).contains(&(2, 0)));
}

#[test]
fn recursion_reproduces_value_iteration() {
    let w = jd();
    let c = CoefficientTable::from_table1(&w);
    let report = recursion_check(&c, &w, &CLinearFn::indicator_origin(), 30, 60).unwrap();
    assert!(report.passed, "{report:?}");
    let zero = recursion_check(&c, &w, &CLinearFn::zero(), 5, 20).unwrap();
    assert_eq!(zero.max_deviation, 0.0);
}

#[test]
fn defective_table_fails_recursion() {
    let w = jd();
    let mut c = CoefficientTable::from_table1(&w);
    let old = c.get(1, ComponentId::Vertical, 1, Step::ZERO);
    c.set(1, ComponentId::Vertical, 1, Step::ZERO, old + 0.05);
    let report = recursion_check(&c, &w, &CLinearFn::indicator_origin(), 20, 50).unwrap();
    assert!(!report.passed);
}

/// Hand-derived recursion for joint departures and `F = 𝟙{n = 0}`.
fn hand_rhs(l: [f64; 2], mu: f64, mu_ax: [f64; 2], vi: &ValueIteration<f64>, i: usize, n: Point) -> Option<f64> {
    let d = |j: usize, m: Point| vi.d(j, m);
    let arrivals = l[0] * d(i, n + Step::E1)? + l[1] * d(i, n + Step::E2)?;
    let k = component_of(n).ok()?;
    let (own, other) = if i == 1 { (0, 1) } else { (1, 0) };
    let own_axis = if i == 1 { ComponentId::Horizontal } else { ComponentId::Vertical };
    let other_axis = if i == 1 { ComponentId::Vertical } else { ComponentId::Horizontal };
    let back = |j: usize| Step::unit(j).neg_of();
    Some(match k {
        ComponentId::Interior => arrivals + mu * d(i, n + Step::NEG_D1)?,
        ComponentId::Origin => -1.0 + arrivals + (mu - mu_ax[own]) * d(i, n)?,
        kk if kk == own_axis => arrivals + mu_ax[own] * d(i, n + back(i))? + (mu - mu_ax[own]) * d(i, n)?,
        kk if kk == other_axis => {
            let j = 3 - i;
            arrivals - (mu - mu_ax[other]) * d(j, n + back(j))?
        }
        _ => unreachable!(),
    })
}

use crate::model::{component_of, Point};

trait NegOf {
    fn neg_of(self) -> Step;
}

impl NegOf for Step {
    fn neg_of(self) -> Step {
        -self
    }
}

#[test]
fn table_recursion_matches_hand_recursion() {
    let (l, mu, ms) = (0.1, 0.8, 0.32);
    let w = joint_departures(l, l, mu, ms, ms).unwrap();
    let c = CoefficientTable::from_table1(&w);
    let f = CLinearFn::indicator_origin();
    let m = 60;
    let mut vi = ValueIteration::new(&w, &f, m);
    for t in 0..30 {
        let extent = (m - t.max(1) - 1) as i64;
        for a in 0..=extent {
            for b in 0..=extent {
                let n = Point::new(a, b);
                for i in 1..=2 {
                    let table = recursion_rhs(&c, &f, &vi, i, n).unwrap();
                    let hand = hand_rhs([l, l], mu, [ms, ms], &vi, i, n).unwrap();
                    assert!((table - hand).abs() <= 1e-12, "t={t} n={n} i={i}: {table} vs {hand}");
                }
            }
        }
        vi.step();
    }
}
