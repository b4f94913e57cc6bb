use proptest::prelude::*;

use super::*;
use crate::bias::CoefficientTable;
use crate::model::{joint_departures, solve_rate_pair, ComponentId, PerturbationPair, RandomWalkSpec, Step};
use crate::oracle::{check_certificate, steady_state_value};
use crate::piecewise::{CLinear, CLinearFn, TComponentId};

fn split_pair() -> PerturbationPair<f64> {
    let original = joint_departures(0.1_f64, 0.1, 0.8, 0.32, 0.32).unwrap();
    let perturbed = joint_departures(0.1_f64, 0.1, 0.8, 0.4, 0.4).unwrap();
    PerturbationPair::new(original, perturbed).unwrap()
}

/// `w` with interior joint-departure mass `delta` moved to the self loop.
fn slower_interior(w: &RandomWalkSpec<f64>, delta: f64) -> RandomWalkSpec<f64> {
    let mut entries = Vec::new();
    for k in ComponentId::ALL {
        entries.extend(w.jumps(k).map(|(u, p)| (k, u, p)));
    }
    entries.push((ComponentId::Interior, Step::NEG_D1, -delta));
    entries.push((ComponentId::Interior, Step::ZERO, delta));
    RandomWalkSpec::new(entries).unwrap()
}

fn solve(kind: ProblemKind, pair: &PerturbationPair<f64>, f: &CLinearFn<f64>, shape: FunctionShape) -> Option<f64> {
    let r = solve_rate_pair(&pair.perturbed).unwrap();
    solve_bound(kind, pair, &r, f, shape).unwrap().bound()
}

#[test]
fn variable_and_row_counts() {
    let pair = split_pair();
    let r = solve_rate_pair(&pair.perturbed).unwrap();
    let f = CLinearFn::indicator_origin();
    let ue = assemble(ProblemKind::UpperError, &pair, &r, &f, FunctionShape::CLinear).unwrap();
    assert_eq!(ue.function_variables(), 48);
    assert_eq!(ue.rows.len(), ue.lp.num_constraints());
    let cu = assemble(ProblemKind::ComparisonUpper, &pair, &r, &f, FunctionShape::CLinear).unwrap();
    assert_eq!(cu.function_variables(), 40);
    let gl = assemble(ProblemKind::UpperError, &pair, &r, &f, FunctionShape::GlobalLinear).unwrap();
    assert_eq!(gl.function_variables(), 16 + 4 * 3);
    let c = assemble(ProblemKind::UpperError, &pair, &r, &f, FunctionShape::Constant).unwrap();
    assert_eq!(c.function_variables(), 16 + 4);
}

#[test]
fn diagonal_perturbation_needs_arbitrary_kind() {
    let split = split_pair();
    let pair = PerturbationPair::new(slower_interior(&split.original, 0.05), split.perturbed.clone()).unwrap();
    let r = solve_rate_pair(&pair.perturbed).unwrap();
    let f = CLinearFn::indicator_origin();
    for kind in [ProblemKind::UpperError, ProblemKind::LowerError, ProblemKind::ComparisonUpper, ProblemKind::ComparisonLower] {
        let err = assemble(kind, &pair, &r, &f, FunctionShape::CLinear).unwrap_err();
        assert_eq!(err, BuildError::KindRestrictionViolated { kind, step: Step::NEG_D1 });
    }
    assert!(assemble(ProblemKind::ArbitraryUpper, &pair, &r, &f, FunctionShape::CLinear).is_ok());
}

#[test]
fn wrong_product_form_is_rejected() {
    let pair = split_pair();
    let r = crate::model::GeometricProductForm::new(0.3, 0.3).unwrap();
    let err = assemble(ProblemKind::UpperError, &pair, &r, &CLinearFn::indicator_origin(), FunctionShape::CLinear).unwrap_err();
    assert!(matches!(err, BuildError::InvalidProductForm(_)));
}

#[test]
fn zero_perturbation_collapses() {
    let w = joint_departures(0.1_f64, 0.1, 0.8, 0.4, 0.4).unwrap();
    let pair = PerturbationPair::new(w.clone(), w).unwrap();
    let r = solve_rate_pair(&pair.perturbed).unwrap();
    let want = (1.0 - r.r1()) * (1.0 - r.r2());
    let f = CLinearFn::indicator_origin();
    for kind in [ProblemKind::UpperError, ProblemKind::LowerError] {
        let got = solve(kind, &pair, &f, FunctionShape::CLinear).unwrap();
        assert!((got - want).abs() < 1e-8, "{kind}: {got} vs {want}");
    }
}

#[test]
fn reference_bounds_bracket_oracle() {
    let pair = split_pair();
    let f = CLinearFn::indicator_origin();
    let oracle = steady_state_value(&pair.original, &f, 1e-9).unwrap().value;
    let ue = solve(ProblemKind::UpperError, &pair, &f, FunctionShape::CLinear).unwrap();
    let le = solve(ProblemKind::LowerError, &pair, &f, FunctionShape::CLinear).unwrap();
    let cu = solve(ProblemKind::ComparisonUpper, &pair, &f, FunctionShape::CLinear).unwrap();
    assert!((ue - 0.69335).abs() < 1e-4 && (le - 0.56438).abs() < 1e-4 && (cu - 0.62905).abs() < 1e-4);
    assert!(le <= oracle && oracle <= cu && cu <= ue);
    // A lower comparison bound would contradict the sign of the perturbation.
    assert_eq!(solve(ProblemKind::ComparisonLower, &pair, &f, FunctionShape::CLinear), None);
}

#[test]
fn shapes_nest() {
    let pair = split_pair();
    let f = CLinearFn::indicator_origin();
    let mut previous: Option<(f64, f64)> = None;
    for shape in [FunctionShape::CLinear, FunctionShape::GlobalLinear, FunctionShape::Constant] {
        let ue = solve(ProblemKind::UpperError, &pair, &f, shape).unwrap_or(f64::INFINITY);
        let le = solve(ProblemKind::LowerError, &pair, &f, shape).unwrap_or(f64::NEG_INFINITY);
        if let Some((pu, pl)) = previous {
            assert!(pu <= ue + 1e-9 && pl >= le - 1e-9, "{shape}: ({le}, {ue}) vs ({pl}, {pu})");
        }
        previous = Some((ue, le));
    }
}

#[test]
fn arbitrary_kinds_agree_with_unit_kinds_on_unit_perturbations() {
    let pair = split_pair();
    let f = CLinearFn::indicator_origin();
    let ue = solve(ProblemKind::UpperError, &pair, &f, FunctionShape::CLinear).unwrap();
    let au = solve(ProblemKind::ArbitraryUpper, &pair, &f, FunctionShape::CLinear).unwrap();
    assert!((ue - au).abs() < 1e-9);
}

#[test]
fn arbitrary_bounds_hold_for_diagonal_perturbation() {
    let split = split_pair();
    let pair = PerturbationPair::new(slower_interior(&split.original, 0.02), split.perturbed.clone()).unwrap();
    let r = solve_rate_pair(&pair.perturbed).unwrap();
    let f = CLinearFn::indicator_origin();
    let oracle = steady_state_value(&pair.original, &f, 1e-9).unwrap().value;
    let up = solve_bound(ProblemKind::ArbitraryUpper, &pair, &r, &f, FunctionShape::CLinear).unwrap();
    let lo = solve_bound(ProblemKind::ArbitraryLower, &pair, &r, &f, FunctionShape::CLinear).unwrap();
    let (u, l) = (up.bound().unwrap(), lo.bound().unwrap());
    assert!(l <= oracle && oracle <= u, "{l} {oracle} {u}");
    for out in [up, lo] {
        let report = check_certificate(out.certificate.as_ref().unwrap(), &pair, &f, 60, 90);
        assert!(report.passed, "{:?}", report.worst());
    }
}

#[test]
fn infeasible_program_has_no_certificate() {
    let pair = split_pair();
    let r = solve_rate_pair(&pair.perturbed).unwrap();
    let problem = assemble(ProblemKind::ComparisonLower, &pair, &r, &CLinearFn::indicator_origin(), FunctionShape::CLinear).unwrap();
    let solution = crate::lp_solver::solve(&problem.lp);
    assert_eq!(extract_certificate(&problem, &solution).unwrap_err(), BuildError::NotOptimal(solution.status));
}

#[test]
fn certificate_json_carries_functions() {
    let pair = split_pair();
    let r = solve_rate_pair(&pair.perturbed).unwrap();
    let out = solve_bound(ProblemKind::UpperError, &pair, &r, &CLinearFn::indicator_origin(), FunctionShape::CLinear).unwrap();
    let json = out.certificate.unwrap().to_json();
    assert_eq!(json["kind"], "upper-error");
    for key in ["Fbar", "G", "A1", "A2", "B1", "B2"] {
        assert!(json[key].is_object(), "{key}");
    }
}

fn nonneg_clinear() -> impl Strategy<Value = CLinearFn<f64>> {
    proptest::array::uniform8(0.0..3.0_f64).prop_map(CLinear::from_slots)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The sign-resolved bias-bound families equal the max form pointwise.
    #[test]
    fn max_resolution_is_exact(a1 in nonneg_clinear(), a2 in nonneg_clinear(), b1 in nonneg_clinear(), b2 in nonneg_clinear()) {
        let pair = split_pair();
        let table = CoefficientTable::from_table1(&pair.original);
        let f = CLinearFn::<f64>::coordinate(1);
        let (a, b) = ([a1, a2], [b1, b2]);
        let families = bias_bound_families(&table, &f, &a, &b);
        for n1 in 0..=30 {
            for n2 in 0..=30 {
                let n = crate::model::Point::new(n1, n2);
                let k = TComponentId::of(n).unwrap().c_component();
                for i in 1..=2 {
                    let df = f.evaluate(n + Step::unit(i)).unwrap() - f.evaluate(n).unwrap();
                    let mut up = b[i - 1].evaluate(n).unwrap() - df;
                    let mut low = a[i - 1].evaluate(n).unwrap() + df;
                    for j in 1..=2 {
                        for u in Step::ALL {
                            if !k.allows(u) {
                                continue;
                            }
                            let c = table.get(i, k, j, u);
                            let (aj, bj) = (a[j - 1].evaluate(n + u).unwrap(), b[j - 1].evaluate(n + u).unwrap());
                            up -= (-c * aj).max(c * bj);
                            low -= (c * aj).max(-c * bj);
                        }
                    }
                    let got_up = families[2 * (i - 1)].function.evaluate(n).unwrap();
                    let got_low = families[2 * (i - 1) + 1].function.evaluate(n).unwrap();
                    prop_assert!((got_up - up).abs() <= 1e-12 * (1.0 + up.abs()), "{n:?} {got_up} {up}");
                    prop_assert!((got_low - low).abs() <= 1e-12 * (1.0 + low.abs()));
                }
            }
        }
    }
}
