use super::{Grid, OracleError};
use crate::model::{component_of, Point, RandomWalkSpec, Step};
use crate::piecewise::CLinearFn;
use crate::Scalar;

/// Default cap on Gauss–Seidel sweeps.
pub const MAX_SWEEPS: usize = 200_000;

/// Stationary distribution of the walk truncated to `[0, M]²`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedDistribution<T> {
    pub m: usize,
    pub probs: Grid<T>,
    /// `max_n |π(n) − Σ_m π(m) P(m, n)|` of the truncated chain.
    pub residual: T,
    pub sweeps: usize,
}

impl<T: Scalar> TruncatedDistribution<T> {
    pub fn expectation(&self, f: &CLinearFn<T>) -> T {
        self.probs
            .points()
            .map(|n| self.probs.at(n.n1 as usize, n.n2 as usize) * f.evaluate(n).expect("grid lies in S"))
            .sum()
    }
}

/// Truncated transition structure: in-flows per state and the self-loop
/// mass that includes every jump leaving the box.
struct Truncation<T> {
    side: usize,
    stay: Vec<T>,
    /// For each state, `(source index, probability)` with source ≠ state.
    inflow: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> Truncation<T> {
    fn new(w: &RandomWalkSpec<T>, m: usize) -> Self {
        let side = m + 1;
        let inside = |n: Point| n.n1 >= 0 && n.n2 >= 0 && n.n1 <= m as i64 && n.n2 <= m as i64;
        let index = |n: Point| n.n1 as usize * side + n.n2 as usize;
        let mut stay = vec![T::zero(); side * side];
        let mut inflow = vec![Vec::new(); side * side];
        for a in 0..side as i64 {
            for b in 0..side as i64 {
                let n = Point::new(a, b);
                let k = component_of(n).expect("box lies in S");
                for (u, p) in w.jumps(k) {
                    let target = n + u;
                    if u == Step::ZERO || !inside(target) {
                        stay[index(n)] = stay[index(n)] + p;
                    } else {
                        inflow[index(target)].push((index(n), p));
                    }
                }
            }
        }
        Truncation { side, stay, inflow }
    }

    fn residual(&self, pi: &[T]) -> T {
        (0..pi.len()).fold(T::zero(), |worst, s| {
            let inflow: T = self.inflow[s].iter().map(|&(src, p)| pi[src] * p).sum();
            worst.max((inflow + self.stay[s] * pi[s] - pi[s]).abs())
        })
    }

    /// One Gauss–Seidel sweep in the given direction; returns the largest
    /// change of an entry.
    fn sweep(&self, pi: &mut [T], forward: bool) -> T {
        let mut change = T::zero();
        let n = pi.len();
        for step in 0..n {
            let s = if forward { step } else { n - 1 - step };
            let out = T::one() - self.stay[s];
            if out <= T::zero() {
                continue;
            }
            let inflow: T = self.inflow[s].iter().map(|&(src, p)| pi[src] * p).sum();
            let new = inflow / out;
            change = change.max((new - pi[s]).abs());
            pi[s] = new;
        }
        change
    }
}

fn normalise<T: Scalar>(pi: &mut [T]) {
    let total: T = pi.iter().copied().sum();
    if total > T::zero() {
        for x in pi.iter_mut() {
            *x = *x / total;
        }
    }
}

/// Stationary distribution of the walk truncated to `[0, M]²`, with jumps
/// that would leave the box turned into self loops.
///
/// Alternating forward/backward Gauss–Seidel sweeps from a uniform start,
/// until successive iterates differ by less than `tol` in max norm.
pub fn stationary_truncated<T: Scalar>(
    w: &RandomWalkSpec<T>,
    m: usize,
    tol: T,
) -> Result<TruncatedDistribution<T>, OracleError> {
    let side = m + 1;
    let start = Grid::filled(side, T::one() / T::coord((side * side) as i64));
    stationary_from(w, start, tol, MAX_SWEEPS)
}

/// As [`stationary_truncated`] but starting from `start` (of side `M + 1`)
/// and with an explicit sweep cap.
pub fn stationary_from<T: Scalar>(
    w: &RandomWalkSpec<T>,
    start: Grid<T>,
    tol: T,
    max_sweeps: usize,
) -> Result<TruncatedDistribution<T>, OracleError> {
    let m = start.side() - 1;
    let chain = Truncation::new(w, m);
    let mut probs = start;
    normalise(probs.values_mut());
    let mut sweeps = 0;
    loop {
        if sweeps >= max_sweeps {
            return Err(OracleError::NotConverged { m, sweeps });
        }
        let pi = probs.values_mut();
        let change = chain.sweep(pi, sweeps % 2 == 0);
        normalise(pi);
        sweeps += 1;
        if change < tol {
            break;
        }
    }
    let residual = chain.residual(probs.values());
    debug_assert_eq!(chain.side, m + 1);
    Ok(TruncatedDistribution { m, probs, residual, sweeps })
}

/// `𝓕 = Σ_n π(n) F(n)` with its error bar.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteadyStateValue<T> {
    pub value: T,
    /// `|𝓕_M − 𝓕_{2M}|` of the last doubling.
    pub error_bar: T,
    /// Truncation level of `value`.
    pub m: usize,
}

/// Largest truncation level tried by [`steady_state_value`].
pub const MAX_TRUNCATION: usize = 1600;

/// Steady-state value of `f` by doubling the truncation level from 100
/// until two consecutive values differ by less than `tol`.
pub fn steady_state_value<T: Scalar>(
    w: &RandomWalkSpec<T>,
    f: &CLinearFn<T>,
    tol: T,
) -> Result<SteadyStateValue<T>, OracleError> {
    steady_state_value_from(w, f, tol, 100)
}

pub fn steady_state_value_from<T: Scalar>(
    w: &RandomWalkSpec<T>,
    f: &CLinearFn<T>,
    tol: T,
    m0: usize,
) -> Result<SteadyStateValue<T>, OracleError> {
    let sweep_tol = sweep_tolerance(tol);
    let mut m = m0;
    let mut dist = stationary_truncated(w, m, sweep_tol)?;
    let mut value = dist.expectation(f);
    while 2 * m <= MAX_TRUNCATION {
        let next_m = 2 * m;
        let mut start = Grid::filled(next_m + 1, T::zero());
        for a in 0..=m {
            for b in 0..=m {
                start.set(a, b, dist.probs.at(a, b));
            }
        }
        dist = stationary_from(w, start, sweep_tol, MAX_SWEEPS)?;
        let next = dist.expectation(f);
        let delta = (next - value).abs();
        m = next_m;
        value = next;
        if delta < tol {
            return Ok(SteadyStateValue { value, error_bar: delta, m });
        }
    }
    Err(OracleError::TruncationLimit { m })
}

/// Inner iteration tolerance, well below the requested accuracy.
fn sweep_tolerance<T: Scalar>(tol: T) -> T {
    (tol * T::lit(1e-4)).max(T::epsilon() * T::lit(4.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{joint_departures, solve_rate_pair, ComponentId, JointDepartures};

    #[test]
    fn product_form_walk_matches_closed_form() {
        let w = joint_departures(0.1_f64, 0.1, 0.8, 0.4, 0.4).unwrap();
        let r = solve_rate_pair(&w).unwrap();
        let dist = stationary_truncated(&w, 200, 1e-13).unwrap();
        for a in 0..=20 {
            for b in 0..=20 {
                let n = Point::new(a, b);
                assert!((dist.probs.get(n).unwrap() - r.probability(n)).abs() < 1e-6, "{n}");
            }
        }
        assert!(dist.residual < 1e-10);
    }

    #[test]
    fn identity_kernel_is_stationary_at_start() {
        let w = RandomWalkSpec::<f64>::new(ComponentId::ALL.map(|k| (k, Step::ZERO, 1.0))).unwrap();
        let dist = stationary_truncated(&w, 10, 1e-12).unwrap();
        assert_eq!(dist.residual, 0.0);
        assert!((dist.probs.at(3, 4) - 1.0 / 121.0).abs() < 1e-15);
    }

    #[test]
    fn steady_state_examples() {
        let w = joint_departures(0.1_f64, 0.1, 0.8, 0.4, 0.4).unwrap();
        let r = solve_rate_pair(&w).unwrap();
        let v = steady_state_value(&w, &CLinearFn::indicator_origin(), 1e-8).unwrap();
        assert!((v.value - (1.0 - r.r1()) * (1.0 - r.r2())).abs() < 1e-8);
        let one = steady_state_value(&w, &CLinearFn::constant(1.0), 1e-8).unwrap();
        assert!((one.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unperturbed_value_inside_closed_form_bracket() {
        let w = JointDepartures::symmetric(0.125_f64, 0.4).walk().unwrap();
        let v = steady_state_value(&w, &CLinearFn::indicator_origin(), 1e-8).unwrap();
        assert!((v.value - 0.572999).abs() < 1e-5, "{v:?}");
    }
}
