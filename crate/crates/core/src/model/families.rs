use std::fmt;
use std::str::FromStr;

use super::{ComponentId, ModelError, RandomWalkSpec, Step};
use crate::Scalar;

const SUM_TOL: f64 = 1e-12;

fn param_err(msg: impl Into<String>) -> ModelError {
    ModelError::Parameters(msg.into())
}

/// Walk with independent arrivals in both coordinates and joint departures
/// from the interior.
///
/// Arrivals `λ1`, `λ2` everywhere. In the interior both coordinates drop by
/// one with probability `μ`; on the horizontal (vertical) axis the single
/// coordinate drops with `μ1` (`μ2`) and the remaining `μ − μi` is a self
/// loop. The origin loops with probability `μ`.
pub fn joint_departures<T: Scalar>(l1: T, l2: T, mu: T, mu1: T, mu2: T) -> Result<RandomWalkSpec<T>, ModelError> {
    JointDepartures { lambda1: l1, lambda2: l2, mu, mu1, mu2 }.walk()
}

/// Walk with two coupled processors.
///
/// Arrivals `λ1`, `λ2` everywhere. In the interior the two queues are
/// served at rates `μ1`, `μ2`; when one queue is empty the other is served at
/// `μh` (horizontal axis) or `μv` (vertical axis), with the unused capacity
/// `μ1 + μ2 − μh` resp. `μ1 + μ2 − μv` as a self loop.
pub fn coupled_processors<T: Scalar>(
    l1: T,
    l2: T,
    mu1: T,
    mu2: T,
    mu_h: T,
    mu_v: T,
) -> Result<RandomWalkSpec<T>, ModelError> {
    CoupledProcessors { lambda1: l1, lambda2: l2, mu1, mu2, mu_h, mu_v }.walk()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointDepartures<T> {
    pub lambda1: T,
    pub lambda2: T,
    pub mu: T,
    pub mu1: T,
    pub mu2: T,
}

impl<T: Scalar> JointDepartures<T> {
    /// Symmetric instance with load `λ/μ = load` and axis rates
    /// `μ1 = μ2 = ratio · μ`, normalised so that `2λ + μ = 1`.
    pub fn symmetric(load: T, ratio: T) -> Self {
        let mu = T::one() / (T::one() + T::lit(2.0) * load);
        let lambda = load * mu;
        JointDepartures { lambda1: lambda, lambda2: lambda, mu, mu1: ratio * mu, mu2: ratio * mu }
    }

    pub fn walk(&self) -> Result<RandomWalkSpec<T>, ModelError> {
        let JointDepartures { lambda1: l1, lambda2: l2, mu, mu1, mu2 } = *self;
        let zero = T::zero();
        if l1 < zero || l2 < zero {
            return Err(param_err("arrival rates must be nonnegative"));
        }
        if (l1 + l2 + mu - T::one()).abs() > T::lit(SUM_TOL) {
            return Err(param_err(format!("λ1+λ2+μ = {} ≠ 1", l1 + l2 + mu)));
        }
        if !(mu1 > zero && mu1 <= mu && mu2 > zero && mu2 <= mu) {
            return Err(param_err("axis rates must satisfy 0 < μi ≤ μ"));
        }
        let mut entries = Vec::with_capacity(16);
        for k in ComponentId::ALL {
            entries.push((k, Step::E1, l1));
            entries.push((k, Step::E2, l2));
        }
        entries.push((ComponentId::Horizontal, Step::NEG_E1, mu1));
        entries.push((ComponentId::Horizontal, Step::ZERO, mu - mu1));
        entries.push((ComponentId::Vertical, Step::NEG_E2, mu2));
        entries.push((ComponentId::Vertical, Step::ZERO, mu - mu2));
        entries.push((ComponentId::Origin, Step::ZERO, mu));
        entries.push((ComponentId::Interior, Step::NEG_D1, mu));
        RandomWalkSpec::new(entries)
    }

    fn with_axis_rates(&self, mu1: T, mu2: T) -> Self {
        JointDepartures { mu1, mu2, ..*self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoupledProcessors<T> {
    pub lambda1: T,
    pub lambda2: T,
    pub mu1: T,
    pub mu2: T,
    pub mu_h: T,
    pub mu_v: T,
}

impl<T: Scalar> CoupledProcessors<T> {
    /// Symmetric instance with `λ1 = λ2 = load · μ`, `μ1 = μ2 = μ` and
    /// `μh = μv = ratio · μ`, normalised so that `2λ + 2μ = 1`.
    pub fn symmetric(load: T, ratio: T) -> Self {
        let two = T::lit(2.0);
        let mu = T::one() / (two + two * load);
        let lambda = load * mu;
        CoupledProcessors { lambda1: lambda, lambda2: lambda, mu1: mu, mu2: mu, mu_h: ratio * mu, mu_v: ratio * mu }
    }

    pub fn walk(&self) -> Result<RandomWalkSpec<T>, ModelError> {
        let CoupledProcessors { lambda1: l1, lambda2: l2, mu1, mu2, mu_h, mu_v } = *self;
        if (l1 + l2 + mu1 + mu2 - T::one()).abs() > T::lit(SUM_TOL) {
            return Err(param_err(format!("λ1+λ2+μ1+μ2 = {} ≠ 1", l1 + l2 + mu1 + mu2)));
        }
        if !(mu_h > T::zero() && mu_v > T::zero()) {
            return Err(param_err("boundary rates must be positive"));
        }
        let total = mu1 + mu2;
        let entries = [
            (ComponentId::Horizontal, Step::NEG_E1, mu_h),
            (ComponentId::Horizontal, Step::ZERO, total - mu_h),
            (ComponentId::Vertical, Step::NEG_E2, mu_v),
            (ComponentId::Vertical, Step::ZERO, total - mu_v),
            (ComponentId::Origin, Step::ZERO, total),
            (ComponentId::Interior, Step::NEG_E1, mu1),
            (ComponentId::Interior, Step::NEG_E2, mu2),
        ];
        let arrivals = ComponentId::ALL.into_iter().flat_map(|k| [(k, Step::E1, l1), (k, Step::E2, l2)]);
        let all: Vec<_> = arrivals.chain(entries).collect();
        for &(k, u, p) in &all {
            if !(p >= T::zero() && p <= T::one()) {
                return Err(param_err(format!("p[{k},{u}] = {p} outside [0,1]")));
            }
        }
        RandomWalkSpec::new(all)
    }
}

/// How a perturbed walk is derived from an example-family instance.
///
/// For joint departures the rules act on `(μ1, μ2)` with `μ` as the total;
/// for coupled processors on `(μh, μv)` with `μ1 + μ2` as the total.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PerturbationRule {
    /// Both boundary rates set to half the total.
    Split,
    /// First rate replaced by the total minus the second.
    Swap,
    /// Second rate replaced by the total minus the first.
    SwapMirrored,
}

impl PerturbationRule {
    pub const ALL: [PerturbationRule; 3] = [PerturbationRule::Split, PerturbationRule::Swap, PerturbationRule::SwapMirrored];

    pub fn name(self) -> &'static str {
        match self {
            PerturbationRule::Split => "split",
            PerturbationRule::Swap => "swap",
            PerturbationRule::SwapMirrored => "swap-mirrored",
        }
    }

    fn apply<T: Scalar>(self, total: T, a: T, b: T) -> (T, T) {
        match self {
            PerturbationRule::Split => (total / T::lit(2.0), total / T::lit(2.0)),
            PerturbationRule::Swap => (total - b, b),
            PerturbationRule::SwapMirrored => (a, total - a),
        }
    }
}

impl fmt::Display for PerturbationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PerturbationRule {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "split" => Ok(PerturbationRule::Split),
            "swap" => Ok(PerturbationRule::Swap),
            "swap-mirrored" | "complement" => Ok(PerturbationRule::SwapMirrored),
            other => Err(param_err(format!("unknown perturbation rule `{other}`"))),
        }
    }
}

/// A parametrised example walk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family<T> {
    JointDepartures(JointDepartures<T>),
    CoupledProcessors(CoupledProcessors<T>),
}

impl<T: Scalar> Family<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Family::JointDepartures(_) => "joint_departures",
            Family::CoupledProcessors(_) => "coupled_processors",
        }
    }

    pub fn walk(&self) -> Result<RandomWalkSpec<T>, ModelError> {
        match self {
            Family::JointDepartures(p) => p.walk(),
            Family::CoupledProcessors(p) => p.walk(),
        }
    }

    pub fn perturb(&self, rule: PerturbationRule) -> Family<T> {
        match *self {
            Family::JointDepartures(p) => {
                let (a, b) = rule.apply(p.mu, p.mu1, p.mu2);
                Family::JointDepartures(p.with_axis_rates(a, b))
            }
            Family::CoupledProcessors(p) => {
                let (a, b) = rule.apply(p.mu1 + p.mu2, p.mu_h, p.mu_v);
                Family::CoupledProcessors(CoupledProcessors { mu_h: a, mu_v: b, ..p })
            }
        }
    }
}
