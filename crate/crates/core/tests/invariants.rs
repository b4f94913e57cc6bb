use proptest::prelude::*;

use qpbound::bias::{verify_assumption, CoefficientTable};
use qpbound::lp_builder::{solve_bound, FunctionShape, ProblemKind};
use qpbound::model::{solve_rate_pair, Family, JointDepartures, Point, PerturbationPair, PerturbationRule};
use qpbound::piecewise::{CLinearFn, Slot};
use qpbound::{Measure, MeasureF32, Pair, ProductForm, ProductFormF32, RandomWalkF32};

fn pair(load: f64, ratio: f64, rule: PerturbationRule) -> Pair {
    let fam = Family::JointDepartures(JointDepartures::symmetric(load, ratio));
    PerturbationPair::new(fam.walk().unwrap(), fam.perturb(rule).walk().unwrap()).unwrap()
}

fn bound(p: &Pair, kind: ProblemKind, shape: FunctionShape, f: &Measure) -> Option<f64> {
    let r = solve_rate_pair(&p.perturbed).unwrap();
    solve_bound(kind, p, &r, f, shape).unwrap().bound()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bounds_are_ordered(load in 0.05..0.45_f64, ratio in 0.1..0.5_f64) {
        let p = pair(load, ratio, PerturbationRule::Split);
        let f = Measure::indicator_origin();
        let ue = bound(&p, ProblemKind::UpperError, FunctionShape::CLinear, &f);
        let le = bound(&p, ProblemKind::LowerError, FunctionShape::CLinear, &f);
        let cu = bound(&p, ProblemKind::ComparisonUpper, FunctionShape::CLinear, &f);
        if let (Some(ue), Some(le)) = (ue, le) {
            prop_assert!(le <= ue + 1e-9, "lower {le} above upper {ue}");
        }
        if let (Some(ue), Some(cu)) = (ue, cu) {
            prop_assert!(cu <= ue + 1e-8, "comparison {cu} above upper {ue}");
        }
    }

    #[test]
    fn restricted_shapes_never_tighten(load in 0.05..0.4_f64, ratio in 0.2..0.5_f64) {
        let p = pair(load, ratio, PerturbationRule::Split);
        let f = Measure::indicator_origin();
        let mut last: Option<f64> = None;
        for shape in [FunctionShape::CLinear, FunctionShape::GlobalLinear, FunctionShape::Constant] {
            let b = bound(&p, ProblemKind::UpperError, shape, &f);
            match (last, b) {
                (Some(prev), Some(b)) => prop_assert!(b >= prev - 1e-8, "{shape:?}: {b} < {prev}"),
                (None, Some(_)) => prop_assert!(shape == FunctionShape::CLinear, "{shape:?} feasible after an infeasible shape"),
                _ => {}
            }
            last = b;
        }
    }

    #[test]
    fn certificate_recomputes_its_bound(load in 0.05..0.45_f64, ratio in 0.1..0.5_f64) {
        let p = pair(load, ratio, PerturbationRule::Split);
        let r = solve_rate_pair(&p.perturbed).unwrap();
        let out = solve_bound(ProblemKind::UpperError, &p, &r, &Measure::coordinate(1), FunctionShape::CLinear).unwrap();
        if let Some(cert) = out.certificate {
            prop_assert!((cert.recomputed_bound() - cert.bound).abs() <= 1e-9 * cert.bound.abs().max(1.0));
        }
    }

    #[test]
    fn single_precision_expectation_tracks_double(
        r1 in 0.05..0.9_f64, r2 in 0.05..0.9_f64,
        coefs in proptest::collection::vec(-5.0..5.0_f64, 8),
    ) {
        let mut f = CLinearFn::zero();
        for (s, c) in Slot::ALL.into_iter().zip(&coefs) {
            f = f.with(s, *c);
        }
        let f32_fn: MeasureF32 = f.cast();
        let exact = f.expectation(&ProductForm::new(r1, r2).unwrap());
        let approx = f32_fn.expectation(&ProductFormF32::new(r1 as f32, r2 as f32).unwrap());
        let scale = coefs.iter().map(|c| c.abs()).sum::<f64>() / ((1.0 - r1) * (1.0 - r2));
        prop_assert!((f64::from(approx) - exact).abs() <= 1e-5 * scale.max(1.0), "{approx} vs {exact}");
    }
}

#[test]
fn single_precision_walk_satisfies_identity() {
    let fam = Family::JointDepartures(JointDepartures::symmetric(0.125_f32, 0.4));
    let w: RandomWalkF32 = fam.walk().unwrap();
    let c = CoefficientTable::from_table1(&w);
    let report = verify_assumption(&c, &w, 1e-6);
    assert!(report.passed, "max residual {}", report.max_residual);
}

#[test]
fn single_precision_rates_match_double() {
    let fam64 = Family::JointDepartures(JointDepartures::symmetric(0.2_f64, 0.5));
    let fam32 = Family::JointDepartures(JointDepartures::symmetric(0.2_f32, 0.5));
    let r64 = solve_rate_pair(&fam64.walk().unwrap()).unwrap();
    let r32 = solve_rate_pair(&fam32.walk().unwrap()).unwrap();
    assert!((f64::from(r32.r1()) - r64.r1()).abs() < 1e-5);
    assert!((f64::from(r32.r2()) - r64.r2()).abs() < 1e-5);
    let n = Point::new(3, 2);
    assert!((f64::from(r32.probability(n)) - r64.probability(n)).abs() < 1e-5);
}
