use super::CoefficientTable;
use crate::model::{component_of, Point, RandomWalkSpec, Step};
use crate::oracle::{OracleError, ValueIteration};
use crate::piecewise::CLinearFn;
use crate::Scalar;

/// Deviation allowed by [`recursion_check`].
pub const RECURSION_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct RecursionReport<T> {
    pub max_deviation: T,
    /// `(t, n, i)` of the largest deviation.
    pub worst: Option<(usize, Point, usize)>,
    pub passed: bool,
}

/// Right-hand side `F(n+e_i) − F(n) + Σ_{j,u} c_{i,k(n),j,u} D_j^t(n+u)`,
/// or `None` if some `D_j^t(n+u)` is outside the safe region.
pub fn recursion_rhs<T: Scalar>(
    c: &CoefficientTable<T>,
    f: &CLinearFn<T>,
    vi: &ValueIteration<T>,
    i: usize,
    n: Point,
) -> Option<T> {
    let k = component_of(n).ok()?;
    let reward = f.evaluate(n + Step::unit(i)).ok()? - f.evaluate(n).ok()?;
    c.entries(i, k).try_fold(reward, |acc, (j, u, coef)| Some(acc + coef * vi.d(j, n + u)?))
}

/// Compares bias terms from value iteration with the coefficient
/// recursion for every `t < t_max` on `[0, M−max(t,1)−1]²`, where both
/// sides are exact.
pub fn recursion_check<T: Scalar>(
    c: &CoefficientTable<T>,
    w: &RandomWalkSpec<T>,
    f: &CLinearFn<T>,
    t_max: usize,
    m: usize,
) -> Result<RecursionReport<T>, OracleError> {
    if m < t_max + 2 {
        return Err(OracleError::HorizonTooLong { t: t_max, m });
    }
    let mut vi = ValueIteration::new(w, f, m);
    let mut max_deviation = T::zero();
    let mut worst = None;
    for t in 0..t_max {
        let extent = (m - t.max(1) - 1) as i64;
        let mut predicted = Vec::with_capacity(((extent + 1) * (extent + 1) * 2) as usize);
        for a in 0..=extent {
            for b in 0..=extent {
                let n = Point::new(a, b);
                for i in 1..=2 {
                    predicted.push((n, i, recursion_rhs(c, f, &vi, i, n).expect("inside safe region")));
                }
            }
        }
        vi.step();
        for (n, i, rhs) in predicted {
            let dev = (vi.d(i, n).expect("inside safe region") - rhs).abs();
            if !(dev <= max_deviation) {
                max_deviation = dev;
                worst = Some((t + 1, n, i));
            }
        }
    }
    Ok(RecursionReport { max_deviation, worst, passed: max_deviation <= T::lit(RECURSION_TOL) })
}
