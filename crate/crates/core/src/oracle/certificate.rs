use std::fmt;

use super::{Grid, ValueIteration};
use crate::lp_builder::BoundCertificate;
use crate::model::{component_of, PerturbationPair, Point, Step};
use crate::piecewise::CLinearFn;
use crate::Scalar;

/// Most negative margin a certificate may show and still pass.
pub const CERTIFICATE_TOL: f64 = 1e-9;

/// Which inequality a margin measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    /// `D_i^t + A_i ≥ 0`.
    Lower(usize),
    /// `B_i − D_i^t ≥ 0`.
    Upper(usize),
    /// The perturbation inequality linking `F̄`, `G` and the bias terms.
    Perturbation,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Lower(i) => write!(f, "lower-{i}"),
            Condition::Upper(i) => write!(f, "upper-{i}"),
            Condition::Perturbation => f.write_str("perturbation"),
        }
    }
}

/// Smallest slack seen for a group of inequalities, with where it occurred.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Margin<T> {
    pub value: T,
    pub n: Point,
    pub t: usize,
    pub condition: Condition,
}

impl<T: Scalar> Margin<T> {
    fn update(slot: &mut Option<Margin<T>>, value: T, n: Point, t: usize, condition: Condition) {
        if slot.as_ref().is_none_or(|m| value < m.value) {
            *slot = Some(Margin { value, n, t, condition });
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateReport<T> {
    pub t_max: usize,
    pub m: usize,
    /// Worst bias sandwich margin over all horizons.
    pub sandwich: Option<Margin<T>>,
    /// Worst perturbation-inequality margin over all horizons.
    pub perturbation: Option<Margin<T>>,
    pub points_checked: usize,
    pub passed: bool,
}

impl<T: Scalar> CertificateReport<T> {
    pub fn worst(&self) -> Option<Margin<T>> {
        match (self.sandwich, self.perturbation) {
            (Some(a), Some(b)) => Some(if b.value < a.value { b } else { a }),
            (a, b) => a.or(b),
        }
    }
}

fn tabulate<T: Scalar>(h: &CLinearFn<T>, side: usize) -> Grid<T> {
    let mut g = Grid::filled(side, T::zero());
    for n in g.points().collect::<Vec<_>>() {
        g.set(n.n1 as usize, n.n2 as usize, h.evaluate(n).expect("grid lies in S"));
    }
    g
}

/// Checks a solved certificate against exact finite-horizon bias terms of
/// the original walk for every `t ≤ t_max` on `[0, M]²`.
///
/// The sandwich `−A_i ≤ D_i^t ≤ B_i` is checked on the safe region; the
/// perturbation inequality, which needs `D_u^t(n) = F^t(n+u) − F^t(n)`, on
/// the safe region shrunk by one.
pub fn check_certificate<T: Scalar>(
    cert: &BoundCertificate<T>,
    pair: &PerturbationPair<T>,
    f: &CLinearFn<T>,
    t_max: usize,
    m: usize,
) -> CertificateReport<T> {
    let side = m + 1;
    let a = [tabulate(&cert.a[0], side), tabulate(&cert.a[1], side)];
    let b = [tabulate(&cert.b[0], side), tabulate(&cert.b[1], side)];
    let mut delta = tabulate(&cert.fbar, side);
    let reward = tabulate(f, side);
    for (d, r) in delta.values_mut().iter_mut().zip(reward.values()) {
        *d = *d - *r;
    }
    let g = cert.g.as_ref().map(|g| tabulate(g, side));
    let directions: Vec<Step> = pair.perturbed_directions();

    let mut sandwich = None;
    let mut perturbation = None;
    let mut points_checked = 0;
    let mut vi = ValueIteration::new(&pair.original, f, m);
    for t in 0..=t_max {
        if t > 0 {
            vi.step();
        }
        let Some(extent) = vi.safe_extent() else { break };
        let values = vi.values();
        for n1 in 0..=extent {
            for n2 in 0..=extent {
                let n = Point::new(n1 as i64, n2 as i64);
                for i in 1..=2 {
                    let d = vi.d(i, n).expect("inside safe region");
                    Margin::update(&mut sandwich, d + a[i - 1].at(n1, n2), n, t, Condition::Lower(i));
                    Margin::update(&mut sandwich, b[i - 1].at(n1, n2) - d, n, t, Condition::Upper(i));
                }
                points_checked += 1;
                if n1 == extent || n2 == extent {
                    continue;
                }
                let k = component_of(n).expect("grid lies in S");
                let here = values.at(n1, n2);
                let mut drift = T::zero();
                for &u in &directions {
                    let q = pair.q(k, u);
                    if q == T::zero() {
                        continue;
                    }
                    let next = n + u;
                    drift = drift + q * (values.at(next.n1 as usize, next.n2 as usize) - here);
                }
                let lhs = delta.at(n1, n2) + drift;
                let slack = match (&g, cert.kind.is_upper()) {
                    (Some(g), _) => g.at(n1, n2) - lhs.abs(),
                    (None, true) => lhs,
                    (None, false) => -lhs,
                };
                Margin::update(&mut perturbation, slack, n, t, Condition::Perturbation);
            }
        }
    }
    let tol = -T::lit(CERTIFICATE_TOL);
    let passed = points_checked > 0 && [sandwich, perturbation].iter().flatten().all(|mg| mg.value >= tol);
    CertificateReport { t_max, m, sandwich, perturbation, points_checked, passed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp_builder::{solve_bound, FunctionShape, ProblemKind};
    use crate::model::{joint_departures, solve_rate_pair};

    fn setup() -> (PerturbationPair<f64>, BoundCertificate<f64>, CLinearFn<f64>) {
        let original = joint_departures(0.1_f64, 0.1, 0.8, 0.32, 0.32).unwrap();
        let perturbed = joint_departures(0.1_f64, 0.1, 0.8, 0.4, 0.4).unwrap();
        let pair = PerturbationPair::new(original, perturbed).unwrap();
        let r = solve_rate_pair(&pair.perturbed).unwrap();
        let f = CLinearFn::indicator_origin();
        let out = solve_bound(ProblemKind::UpperError, &pair, &r, &f, FunctionShape::CLinear).unwrap();
        (pair, out.certificate.unwrap(), f)
    }

    #[test]
    fn valid_certificate_passes() {
        let (pair, cert, f) = setup();
        let report = check_certificate(&cert, &pair, &f, 40, 60);
        assert!(report.passed, "{:?}", report.worst());
        assert!(report.worst().unwrap().value >= -1e-9);
    }

    #[test]
    fn halved_bias_bound_is_located() {
        let (pair, mut cert, f) = setup();
        cert.b[0] = cert.b[0].map(|&x| 0.5 * x);
        let report = check_certificate(&cert, &pair, &f, 40, 60);
        assert!(!report.passed);
        let s = report.sandwich.unwrap();
        assert!(s.value < 0.0);
        assert_eq!(s.condition, Condition::Upper(1));
    }

    #[test]
    fn zero_perturbation_is_tight() {
        let (pair, mut cert, f) = setup();
        let same = PerturbationPair::new(pair.original.clone(), pair.original.clone()).unwrap();
        cert.fbar = f.clone();
        cert.g = Some(CLinearFn::zero());
        let report = check_certificate(&cert, &same, &f, 20, 40);
        assert_eq!(report.perturbation.unwrap().value, 0.0);
    }
}
