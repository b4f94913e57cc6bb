//! Self-check suites behind `qpbound verify`.
//!
//! Each suite is deterministic for a given seed and returns a
//! machine-readable [`SuiteReport`].

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::bias::{recursion_check, verify_assumption, CoefficientTable, RECURSION_TOL};
use crate::lp_builder::{solve_bound, FunctionShape, ProblemKind};
use crate::model::{
    coupled_processors, joint_departures, solve_rate_pair, ComponentId, CoupledProcessors, Family, GeometricProductForm,
    JointDepartures, PerturbationPair, PerturbationRule, Point, RandomWalkSpec, Step,
};
use crate::oracle::{check_certificate, stationary_truncated, CERTIFICATE_TOL};
use crate::piecewise::{CLinear, CLinearFn, TComponentId, TDomain, TLinear};

/// Hidden hook: when set to `c[i][k][j][u1,u2]<delta>` (for example
/// `c[2][1][2][1,0]+0.01`), that coefficient is shifted by `delta` in every
/// table the coefficient suites check.
pub const DEFECT_ENV: &str = "QPBOUND_INJECT_DEFECT";

pub const ASSUMPTION_TOL: f64 = 1e-12;
pub const EXPECTATION_TOL: f64 = 1e-8;
pub const STATIONARY_TOL: f64 = 1e-6;

/// Horizon and grid of the recursion suite.
pub const RECURSION_T: usize = 50;
pub const RECURSION_M: usize = 120;
/// Horizon and grid of the certificate suite.
pub const CERTIFICATE_T: usize = 100;
pub const CERTIFICATE_M: usize = 150;
/// Grid of the nonnegativity suite.
pub const NONNEGATIVITY_EXTENT: i64 = 200;
/// Truncation of the expectation suite.
pub const EXPECTATION_M: i64 = 300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Assumption1,
    Recursion,
    Nonnegativity,
    Expectation,
    Stationarity,
    Certificates,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::Assumption1, Suite::Recursion, Suite::Nonnegativity, Suite::Expectation, Suite::Stationarity, Suite::Certificates];

    pub fn key(self) -> &'static str {
        match self {
            Suite::Assumption1 => "assumption1",
            Suite::Recursion => "recursion",
            Suite::Nonnegativity => "nonnegativity",
            Suite::Expectation => "expectation",
            Suite::Stationarity => "stationarity",
            Suite::Certificates => "certificates",
        }
    }

    fn default_cases(self) -> usize {
        match self {
            Suite::Assumption1 | Suite::Expectation => 1000,
            Suite::Nonnegativity => 10_000,
            _ => 0,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL.into_iter().find(|x| x.key() == s).ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

/// A shifted coefficient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Defect {
    pub i: usize,
    pub k: ComponentId,
    pub j: usize,
    pub u: Step,
    pub delta: f64,
}

impl FromStr for Defect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("malformed defect `{s}`");
        let close = s.rfind(']').ok_or_else(bad)?;
        let delta: f64 = s[close + 1..].trim().parse().map_err(|_| bad())?;
        let inner = s[..close].strip_prefix("c[").ok_or_else(bad)?;
        let parts: Vec<&str> = inner.split("][").collect();
        let [i, k, j, u] = parts.as_slice() else { return Err(bad()) };
        let (u1, u2) = u.split_once(',').ok_or_else(bad)?;
        let num = |x: &str| x.trim().parse::<i64>().map_err(|_| bad());
        let i = num(i)? as usize;
        let j = num(j)? as usize;
        let k = ComponentId::from_number(num(k)? as usize).ok_or_else(bad)?;
        let u = Step::new(num(u1)?, num(u2)?).map_err(|_| bad())?;
        if !(1..=2).contains(&i) || !(1..=2).contains(&j) || !k.allows(u) {
            return Err(bad());
        }
        Ok(Defect { i, k, j, u, delta })
    }
}

impl Defect {
    pub fn from_env() -> Option<Defect> {
        std::env::var(DEFECT_ENV).ok().and_then(|s| s.parse().ok())
    }

    pub fn apply(&self, c: &mut CoefficientTable<f64>) {
        let old = c.get(self.i, self.k, self.j, self.u);
        c.set(self.i, self.k, self.j, self.u, old + self.delta);
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Random cases for the randomized suites; `None` uses each suite's default.
    pub random: Option<usize>,
    pub seed: u64,
    /// Models checked in addition to the built-in instances.
    pub models: Vec<(String, RandomWalkSpec<f64>)>,
    pub defect: Option<Defect>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { random: None, seed: 0x5eed, models: Vec::new(), defect: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    /// Location of the worst case, or a summary.
    pub detail: String,
    pub seconds: f64,
}

impl SuiteReport {
    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite.key(),
            "passed": self.passed,
            "cases": self.cases,
            "max_error": self.max_error,
            "tolerance": self.tolerance,
            "detail": self.detail,
            "seconds": self.seconds,
        })
    }
}

/// Built-in instances: the reference joint-departures and coupled-processors walks.
pub fn reference_models() -> Vec<(String, RandomWalkSpec<f64>)> {
    vec![
        ("joint_departures(0.1,0.1,0.8,0.32,0.32)".into(), joint_departures(0.1, 0.1, 0.8, 0.32, 0.32).expect("valid")),
        ("coupled_processors(0.2,0.2,0.3,0.3,0.25,0.35)".into(), coupled_processors(0.2, 0.2, 0.3, 0.3, 0.25, 0.35).expect("valid")),
    ]
}

/// A walk with random support inside each `N_k` and random weights.
pub fn random_walk(rng: &mut impl Rng) -> RandomWalkSpec<f64> {
    let mut entries = Vec::new();
    for k in ComponentId::ALL {
        let mut weights: Vec<(Step, f64)> =
            k.neighbors().iter().map(|&u| (u, if rng.gen_bool(0.2) { 0.0 } else { rng.gen::<f64>() })).collect();
        let total: f64 = weights.iter().map(|w| w.1).sum();
        if total == 0.0 {
            weights = vec![(Step::ZERO, 1.0)];
        } else {
            for w in &mut weights {
                w.1 /= total;
            }
        }
        entries.extend(weights.into_iter().map(|(u, p)| (k, u, p)));
    }
    RandomWalkSpec::new(entries).expect("normalised rows")
}

/// A T-linear function with small integer coefficients on a random domain,
/// nonnegative about half the time; integer data keeps every evaluation exact.
pub fn random_tlinear(rng: &mut impl Rng) -> TLinear<f64> {
    let domain = if rng.gen_bool(0.5) {
        TDomain::FULL
    } else {
        TDomain::from_components(TComponentId::ALL.into_iter().filter(|_| rng.gen_bool(0.7)))
    };
    let nonneg = rng.gen_bool(0.5);
    let slots = TComponentId::ALL.map(|t| {
        if nonneg {
            let rep = t.representative();
            let corner = rng.gen_range(0..=4) as f64;
            let s1 = if t.unbounded_in(1) { rng.gen_range(0..=3) as f64 } else { rng.gen_range(-3..=3) as f64 };
            let s2 = if t.unbounded_in(2) { rng.gen_range(0..=3) as f64 } else { rng.gen_range(-3..=3) as f64 };
            [corner - s1 * rep.n1 as f64 - s2 * rep.n2 as f64, s1, s2]
        } else {
            [rng.gen_range(-5..=5) as f64, rng.gen_range(-3..=3) as f64, rng.gen_range(-3..=3) as f64]
        }
    });
    TLinear::from_slots(slots, domain)
}

fn case_rng(seed: u64, case: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (case as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn table_for(w: &RandomWalkSpec<f64>, defect: Option<Defect>) -> CoefficientTable<f64> {
    let mut c = CoefficientTable::from_table1(w);
    if let Some(d) = defect {
        d.apply(&mut c);
    }
    c
}

fn assumption1(opts: &VerifyOptions, cases: usize) -> (usize, f64, String, bool) {
    let mut walks: Vec<(String, RandomWalkSpec<f64>)> = reference_models();
    walks.extend(opts.models.iter().cloned());
    walks.extend((0..cases).map(|n| (format!("random #{n}"), random_walk(&mut case_rng(opts.seed, n)))));
    let mut worst = (0.0, String::from("none"));
    for (name, w) in &walks {
        let report = verify_assumption(&table_for(w, opts.defect), w, ASSUMPTION_TOL);
        if report.max_residual > worst.0 || (!report.passed && worst.1 == "none") {
            let located = report
                .violations
                .iter()
                .max_by(|a, b| a.residual.abs().total_cmp(&b.residual.abs()))
                .map(|v| format!("{name}: residual {:e} at i={}, k={}, w=({},{})", v.residual, v.i, v.k.number(), v.w.0, v.w.1))
                .unwrap_or_else(|| format!("{name}: max residual {:e}", report.max_residual));
            worst = (report.max_residual, located);
        }
    }
    (walks.len(), worst.0, worst.1, worst.0 <= ASSUMPTION_TOL)
}

fn recursion(opts: &VerifyOptions) -> (usize, f64, String, bool) {
    let mut walks = reference_models();
    walks.extend(opts.models.iter().cloned());
    let measures = [("indicator_origin", CLinearFn::indicator_origin()), ("n1", CLinearFn::coordinate(1))];
    let jobs: Vec<_> = walks.iter().flat_map(|w| measures.iter().map(move |m| (w, m))).collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|((name, w), (fname, f))| {
            let c = table_for(w, opts.defect);
            (name, fname, recursion_check(&c, w, f, RECURSION_T, RECURSION_M))
        })
        .collect();
    let mut worst = (0.0_f64, String::from("none"));
    let mut ok = true;
    for (name, fname, res) in results {
        match res {
            Ok(r) => {
                ok &= r.passed;
                if r.max_deviation >= worst.0 {
                    let at = r.worst.map(|(t, n, i)| format!(" at t={t}, n=({},{}), i={i}", n.n1, n.n2)).unwrap_or_default();
                    worst = (r.max_deviation, format!("{name}, F={fname}: deviation {:e}{at}", r.max_deviation));
                }
            }
            Err(e) => {
                ok = false;
                worst.1 = format!("{name}: {e}");
            }
        }
    }
    (jobs.len(), worst.0, worst.1, ok)
}

/// Checks one random T-linear function; returns a failure description.
fn nonnegativity_case(h: &TLinear<f64>) -> Option<String> {
    let rows = h.nonneg_inequalities();
    match rows.iter().find(|r| r.expr < 0.0) {
        None => {
            for n1 in 0..=NONNEGATIVITY_EXTENT {
                for n2 in 0..=NONNEGATIVITY_EXTENT {
                    let n = Point::new(n1, n2);
                    if let Ok(v) = h.evaluate(n) {
                        if v < 0.0 {
                            return Some(format!("inequalities hold but h({n1},{n2}) = {v}"));
                        }
                    }
                }
            }
            None
        }
        Some(row) => match h.witness(row) {
            Some(n) if h.evaluate(n).is_ok_and(|v| v < 0.0) => None,
            Some(n) => Some(format!("witness ({},{}) for violated row on T{} is not negative", n.n1, n.n2, row.t.number())),
            None => Some(format!("no witness for violated row on T{}", row.t.number())),
        },
    }
}

fn nonnegativity(opts: &VerifyOptions, cases: usize) -> (usize, f64, String, bool) {
    let failures: Vec<(usize, String)> = (0..cases)
        .into_par_iter()
        .filter_map(|n| nonnegativity_case(&random_tlinear(&mut case_rng(opts.seed, n))).map(|e| (n, e)))
        .collect();
    let detail = match failures.first() {
        Some((n, e)) => format!("{} failing cases; first #{n}: {e}", failures.len()),
        None => "all cases consistent".into(),
    };
    (cases, failures.len() as f64, detail, failures.is_empty())
}

fn truncated_expectation(f: &CLinearFn<f64>, r: &GeometricProductForm<f64>) -> f64 {
    let mut sum = 0.0;
    for n1 in 0..=EXPECTATION_M {
        for n2 in 0..=EXPECTATION_M {
            let n = Point::new(n1, n2);
            sum += r.probability(n) * f.evaluate(n).expect("n in S");
        }
    }
    sum
}

fn expectation(opts: &VerifyOptions, cases: usize) -> (usize, f64, String, bool) {
    let errors: Vec<(usize, f64)> = (0..cases)
        .into_par_iter()
        .map(|n| {
            let mut rng = case_rng(opts.seed, n);
            let f = CLinear::from_slots(std::array::from_fn(|_| rng.gen_range(-2.0..2.0)));
            let r = GeometricProductForm::new(rng.gen_range(0.05..0.9), rng.gen_range(0.05..0.9)).expect("inside (0,1)");
            (n, (f.expectation(&r) - truncated_expectation(&f, &r)).abs())
        })
        .collect();
    let (case, err) = errors.iter().copied().fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    (cases, err, format!("max |closed form − truncated sum| = {err:e} (case #{case})"), err <= EXPECTATION_TOL)
}

fn stationarity(opts: &VerifyOptions) -> (usize, f64, String, bool) {
    let split = Family::JointDepartures(JointDepartures { lambda1: 0.1, lambda2: 0.1, mu: 0.8, mu1: 0.32, mu2: 0.32 })
        .perturb(PerturbationRule::Split);
    let mut walks = vec![("joint_departures split".to_string(), split.walk().expect("valid"))];
    walks.extend(reference_models().into_iter().chain(opts.models.iter().cloned()));
    let with_form: Vec<_> = walks.into_iter().filter_map(|(name, w)| solve_rate_pair(&w).ok().map(|r| (name, w, r))).collect();
    let results: Vec<_> = with_form
        .par_iter()
        .map(|(name, w, r)| {
            let dist = stationary_truncated(w, 200, 1e-13);
            (name, dist.map(|d| {
                let mut err: f64 = 0.0;
                for n1 in 0..=20 {
                    for n2 in 0..=20 {
                        err = err.max((d.probs.at(n1, n2) - r.probability(Point::new(n1 as i64, n2 as i64))).abs());
                    }
                }
                err
            }))
        })
        .collect();
    let mut worst = (0.0_f64, String::from("none"));
    let mut ok = !results.is_empty();
    for (name, res) in results {
        match res {
            Ok(err) => {
                ok &= err <= STATIONARY_TOL;
                if err >= worst.0 {
                    worst = (err, format!("{name}: max deviation {err:e} on [0,20]²"));
                }
            }
            Err(e) => {
                ok = false;
                worst.1 = format!("{name}: {e}");
            }
        }
    }
    (with_form.len(), worst.0, worst.1, ok)
}

/// A labelled family instance, its perturbation rule, measure and the kinds to solve.
pub type CertificateInstance = (String, Family<f64>, PerturbationRule, CLinearFn<f64>, Vec<ProblemKind>);

/// The instances whose certificates the suite checks.
pub fn certificate_instances() -> Vec<CertificateInstance> {
    use ProblemKind::*;
    vec![
        (
            "joint departures, λ=0.1, μ*=0.32, split, F=1{n=0}".into(),
            Family::JointDepartures(JointDepartures { lambda1: 0.1, lambda2: 0.1, mu: 0.8, mu1: 0.32, mu2: 0.32 }),
            PerturbationRule::Split,
            CLinearFn::indicator_origin(),
            vec![UpperError, LowerError, ComparisonUpper],
        ),
        (
            "joint departures, λ/μ=0.3, μ*=0.4μ, swap, F=n1".into(),
            Family::JointDepartures(JointDepartures::symmetric(0.3, 0.4)),
            PerturbationRule::Swap,
            CLinearFn::coordinate(1),
            vec![UpperError, LowerError],
        ),
        (
            "coupled processors, λ/μ=0.3, μ*=0.4μ, F=n1".into(),
            Family::CoupledProcessors(CoupledProcessors::symmetric(0.3, 0.4)),
            PerturbationRule::SwapMirrored,
            CLinearFn::coordinate(1),
            vec![UpperError, LowerError],
        ),
    ]
}

fn certificates() -> (usize, f64, String, bool) {
    let jobs: Vec<_> = certificate_instances()
        .into_iter()
        .flat_map(|(name, fam, rule, f, kinds)| kinds.into_iter().map(move |k| (name.clone(), fam, rule, f.clone(), k)))
        .collect();
    let results: Vec<Result<(String, f64), String>> = jobs
        .par_iter()
        .map(|(name, fam, rule, f, kind)| {
            let label = format!("{name}, {kind}");
            let pair = PerturbationPair::new(fam.walk().map_err(|e| e.to_string())?, fam.perturb(*rule).walk().map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let r = solve_rate_pair(&pair.perturbed).map_err(|e| format!("{label}: {e}"))?;
            let out = solve_bound(*kind, &pair, &r, f, FunctionShape::CLinear).map_err(|e| format!("{label}: {e}"))?;
            let cert = out.certificate.ok_or_else(|| format!("{label}: solver status {}", out.stats.status.name()))?;
            let report = check_certificate(&cert, &pair, f, CERTIFICATE_T, CERTIFICATE_M);
            let worst = report.worst().ok_or_else(|| format!("{label}: nothing checked"))?;
            Ok((format!("{label}: worst margin {:e} ({} at t={}, n=({},{}))", worst.value, worst.condition, worst.t, worst.n.n1, worst.n.n2), worst.value))
        })
        .collect();
    let mut ok = true;
    let mut worst = (f64::INFINITY, String::from("none"));
    for res in results {
        match res {
            Ok((detail, margin)) => {
                ok &= margin >= -CERTIFICATE_TOL;
                if margin < worst.0 {
                    worst = (margin, detail);
                }
            }
            Err(e) => {
                ok = false;
                worst.1 = e;
            }
        }
    }
    // Report the violation size, zero when every margin is nonnegative.
    (jobs.len(), (-worst.0).max(0.0), worst.1, ok)
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> SuiteReport {
    let start = Instant::now();
    let cases = opts.random.unwrap_or(suite.default_cases());
    let (cases, max_error, detail, passed, tolerance) = match suite {
        Suite::Assumption1 => {
            let (n, e, d, p) = assumption1(opts, cases);
            (n, e, d, p, ASSUMPTION_TOL)
        }
        Suite::Recursion => {
            let (n, e, d, p) = recursion(opts);
            (n, e, d, p, RECURSION_TOL)
        }
        Suite::Nonnegativity => {
            let (n, e, d, p) = nonnegativity(opts, cases);
            (n, e, d, p, 0.0)
        }
        Suite::Expectation => {
            let (n, e, d, p) = expectation(opts, cases);
            (n, e, d, p, EXPECTATION_TOL)
        }
        Suite::Stationarity => {
            let (n, e, d, p) = stationarity(opts);
            (n, e, d, p, STATIONARY_TOL)
        }
        Suite::Certificates => {
            let (n, e, d, p) = certificates();
            (n, e, d, p, CERTIFICATE_TOL)
        }
    };
    SuiteReport { suite, passed, cases, max_error, tolerance, detail, seconds: start.elapsed().as_secs_f64() }
}

pub fn run(suites: &[Suite], opts: &VerifyOptions) -> Vec<SuiteReport> {
    suites.iter().map(|&s| run_suite(s, opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> VerifyOptions {
        VerifyOptions { random: Some(50), ..Default::default() }
    }

    #[test]
    fn defect_parsing() {
        let d: Defect = "c[2][1][2][1,0]+0.01".parse().unwrap();
        assert_eq!((d.i, d.k, d.j, d.u, d.delta), (2, ComponentId::Horizontal, 2, Step::E1, 0.01));
        let d: Defect = "c[1][4][1][-1,-1]-1e-3".parse().unwrap();
        assert_eq!((d.u, d.delta), (Step::NEG_D1, -1e-3));
        assert!("c[1][1][1][0,-1]+1".parse::<Defect>().is_err());
        assert!("nonsense".parse::<Defect>().is_err());
    }

    #[test]
    fn randomized_suites_pass() {
        for s in [Suite::Assumption1, Suite::Nonnegativity, Suite::Expectation] {
            let r = run_suite(s, &quick());
            assert!(r.passed, "{s}: {}", r.detail);
        }
    }

    #[test]
    fn injected_defect_is_located() {
        let opts = VerifyOptions { defect: Some("c[2][1][2][1,0]+0.01".parse().unwrap()), ..quick() };
        let r = run_suite(Suite::Assumption1, &opts);
        assert!(!r.passed);
        assert!((r.max_error - 0.01).abs() < 1e-9);
        assert!(r.detail.contains("i=2, k=1"), "{}", r.detail);
    }

    #[test]
    fn random_tlinear_covers_both_outcomes() {
        let mut rng = case_rng(1, 0);
        let (mut holds, mut fails) = (0, 0);
        for _ in 0..200 {
            let h = random_tlinear(&mut rng);
            if h.nonneg_inequalities().iter().all(|r| r.expr >= 0.0) {
                holds += 1;
            } else {
                fails += 1;
            }
        }
        assert!(holds > 20 && fails > 20, "{holds} {fails}");
    }

    #[test]
    fn report_json() {
        let r = run_suite(Suite::Expectation, &VerifyOptions { random: Some(3), ..Default::default() });
        let v = r.to_json();
        assert_eq!(v["suite"], "expectation");
        assert_eq!(v["passed"], true);
    }
}
