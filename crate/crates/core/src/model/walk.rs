use std::fmt;

use super::{ComponentId, ModelError, Step};
use crate::Scalar;

/// Default tolerance for row sums of a transition kernel.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Transition probabilities `p_{k,u}` of a quarter-plane random walk.
///
/// Stored densely as four rows of nine entries. Construction through
/// [`RandomWalkSpec::from_entries`] does not validate, so that defective
/// kernels can be inspected with [`RandomWalkSpec::validate`]; every other
/// constructor returns only valid walks.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomWalkSpec<T> {
    probs: [[T; 9]; 4],
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation<T> {
    /// Nonzero probability for a jump outside `N_k`.
    Support { k: ComponentId, u: Step, value: T },
    RowSum { k: ComponentId, sum: T },
    Negative { k: ComponentId, u: Step, value: T },
    NotFinite { k: ComponentId, u: Step },
}

impl<T: Scalar> fmt::Display for Violation<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Support { k, u, value } => write!(f, "support k={k} u={u} p={value}"),
            Violation::RowSum { k, sum } => write!(f, "row-sum k={k} sum={sum}"),
            Violation::Negative { k, u, value } => write!(f, "negative k={k} u={u} p={value}"),
            Violation::NotFinite { k, u } => write!(f, "non-finite k={k} u={u}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport<T> {
    pub violations: Vec<Violation<T>>,
}

impl<T: Scalar> ValidationReport<T> {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl<T: Scalar> fmt::Display for ValidationReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("ok");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

impl<T: Scalar> RandomWalkSpec<T> {
    /// Builds a kernel from `(k, u, p)` triples without validating it.
    /// Repeated keys accumulate.
    pub fn from_entries(entries: impl IntoIterator<Item = (ComponentId, Step, T)>) -> Self {
        let mut probs = [[T::zero(); 9]; 4];
        for (k, u, p) in entries {
            probs[k.index()][u.index()] = probs[k.index()][u.index()] + p;
        }
        RandomWalkSpec { probs }
    }

    /// Builds and validates with the default tolerance.
    pub fn new(entries: impl IntoIterator<Item = (ComponentId, Step, T)>) -> Result<Self, ModelError> {
        let walk = Self::from_entries(entries);
        walk.check()?;
        Ok(walk)
    }

    /// `p_{k,u}`; zero for unset entries.
    #[inline]
    pub fn p(&self, k: ComponentId, u: Step) -> T {
        self.probs[k.index()][u.index()]
    }

    pub fn row(&self, k: ComponentId) -> &[T; 9] {
        &self.probs[k.index()]
    }

    /// Nonzero entries `(u, p_{k,u})` of row `k`.
    pub fn jumps(&self, k: ComponentId) -> impl Iterator<Item = (Step, T)> + '_ {
        Step::ALL
            .into_iter()
            .map(move |u| (u, self.p(k, u)))
            .filter(|(_, p)| *p != T::zero())
    }

    pub fn validate(&self) -> ValidationReport<T> {
        self.validate_with(T::lit(ROW_SUM_TOL))
    }

    /// Checks support (`u ∈ N_k`), nonnegativity and unit row sums.
    pub fn validate_with(&self, tol: T) -> ValidationReport<T> {
        let mut violations = Vec::new();
        for k in ComponentId::ALL {
            let mut sum = T::zero();
            for u in Step::ALL {
                let value = self.p(k, u);
                if !value.is_finite() {
                    violations.push(Violation::NotFinite { k, u });
                    continue;
                }
                if value != T::zero() && !k.allows(u) {
                    violations.push(Violation::Support { k, u, value });
                }
                if value < T::zero() {
                    violations.push(Violation::Negative { k, u, value });
                }
                sum = sum + value;
            }
            if (sum - T::one()).abs() > tol {
                violations.push(Violation::RowSum { k, sum });
            }
        }
        ValidationReport { violations }
    }

    /// Returns an error carrying the report when the walk is invalid.
    pub fn check(&self) -> Result<(), ModelError> {
        let report = self.validate();
        if report.is_ok() {
            Ok(())
        } else {
            Err(ModelError::InvalidWalk(report.to_string()))
        }
    }

    /// Converts the element type.
    pub fn cast<U: Scalar>(&self) -> RandomWalkSpec<U> {
        let mut probs = [[U::zero(); 9]; 4];
        for k in 0..4 {
            for u in 0..9 {
                probs[k][u] = U::lit(self.probs[k][u].to_f64_lossy());
            }
        }
        RandomWalkSpec { probs }
    }
}

/// Original walk `R` and perturbed walk `R̄`.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationPair<T> {
    pub original: RandomWalkSpec<T>,
    pub perturbed: RandomWalkSpec<T>,
}

impl<T: Scalar> PerturbationPair<T> {
    pub fn new(original: RandomWalkSpec<T>, perturbed: RandomWalkSpec<T>) -> Result<Self, ModelError> {
        original.check()?;
        perturbed.check()?;
        Ok(PerturbationPair { original, perturbed })
    }

    /// `q_{k,u} = p̄_{k,u} − p_{k,u}`.
    #[inline]
    pub fn q(&self, k: ComponentId, u: Step) -> T {
        self.perturbed.p(k, u) - self.original.p(k, u)
    }

    /// `Σ_u q_{k,u}`, zero up to rounding for valid pairs.
    pub fn q_mass(&self, k: ComponentId) -> T {
        Step::ALL.into_iter().map(|u| self.q(k, u)).sum()
    }

    /// Directions `u ≠ 0` with `q_{k,u} ≠ 0` for some `k`, in index order.
    pub fn perturbed_directions(&self) -> Vec<Step> {
        Step::ALL
            .into_iter()
            .filter(|&u| u != Step::ZERO)
            .filter(|&u| ComponentId::ALL.into_iter().any(|k| self.q(k, u) != T::zero()))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.perturbed_directions().is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::joint_departures;

    #[test]
    fn joint_departures_is_valid() {
        let w = joint_departures(0.1_f64, 0.1, 0.8, 0.32, 0.32).unwrap();
        assert!(w.validate().is_ok());
    }

    #[test]
    fn short_interior_row_reported() {
        let w = joint_departures(0.1_f64, 0.1, 0.8, 0.32, 0.32).unwrap();
        let mut entries: Vec<_> = ComponentId::ALL
            .into_iter()
            .flat_map(|k| w.jumps(k).map(move |(u, p)| (k, u, p)))
            .collect();
        for e in entries.iter_mut() {
            if e.0 == ComponentId::Interior && e.1 == Step::NEG_D1 {
                e.2 = 0.7;
            }
        }
        let report = RandomWalkSpec::from_entries(entries).validate();
        assert_eq!(report.violations.len(), 1);
        assert!(report.to_string().starts_with("row-sum k=4"), "{report}");
    }

    #[test]
    fn out_of_support_entry_reported() {
        let w = joint_departures(0.1_f64, 0.1, 0.8, 0.32, 0.32).unwrap();
        let mut entries: Vec<_> = ComponentId::ALL
            .into_iter()
            .flat_map(|k| w.jumps(k).map(move |(u, p)| (k, u, p)))
            .collect();
        entries.push((ComponentId::Horizontal, Step::NEG_E2, 0.1));
        entries.push((ComponentId::Horizontal, Step::ZERO, -0.1));
        let report = RandomWalkSpec::from_entries(entries).validate();
        assert!(report.to_string().contains("support k=1"), "{report}");
        assert!(!report.is_ok());
    }

    #[test]
    fn negative_entry_reported() {
        let w = RandomWalkSpec::from_entries(
            ComponentId::ALL
                .into_iter()
                .flat_map(|k| [(k, Step::ZERO, 1.5_f64), (k, Step::D1, -0.5)]),
        );
        let report = w.validate();
        assert_eq!(
            report.violations.iter().filter(|v| matches!(v, Violation::Negative { .. })).count(),
            4
        );
    }

    #[test]
    fn q_of_split_perturbation() {
        let r = joint_departures(0.1_f64, 0.1, 0.8, 0.32, 0.32).unwrap();
        let rb = joint_departures(0.1_f64, 0.1, 0.8, 0.4, 0.4).unwrap();
        let pair = PerturbationPair::new(r, rb).unwrap();
        assert!((pair.q(ComponentId::Horizontal, Step::NEG_E1) - 0.08).abs() < 1e-15);
        assert!((pair.q(ComponentId::Horizontal, Step::ZERO) + 0.08).abs() < 1e-15);
        assert_eq!(pair.perturbed_directions(), vec![Step::NEG_E1, Step::NEG_E2]);
        for k in ComponentId::ALL {
            assert!(pair.q_mass(k).abs() < 1e-15);
        }
    }
}
