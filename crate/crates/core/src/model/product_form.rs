use super::{component_of, ModelError, Point, RandomWalkSpec, Step};
use crate::Scalar;

/// Representative state of each T-component, in T-index order.
pub(crate) const REPRESENTATIVES: [Point; 9] = [
    Point::new(0, 0),
    Point::new(1, 0),
    Point::new(2, 0),
    Point::new(0, 1),
    Point::new(1, 1),
    Point::new(2, 1),
    Point::new(0, 2),
    Point::new(1, 2),
    Point::new(2, 2),
];

/// `π̄(n) = (1−r1) r1^{n1} (1−r2) r2^{n2}` with `(r1, r2)` in the open unit square.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometricProductForm<T> {
    r1: T,
    r2: T,
}

impl<T: Scalar> GeometricProductForm<T> {
    pub fn new(r1: T, r2: T) -> Result<Self, ModelError> {
        let inside = |r: T| r > T::zero() && r < T::one();
        if inside(r1) && inside(r2) {
            Ok(GeometricProductForm { r1, r2 })
        } else {
            Err(ModelError::InvalidProductForm(r1.to_f64_lossy(), r2.to_f64_lossy()))
        }
    }

    #[inline]
    pub fn r1(&self) -> T {
        self.r1
    }

    #[inline]
    pub fn r2(&self) -> T {
        self.r2
    }

    pub fn probability(&self, n: Point) -> T {
        let one = T::one();
        (one - self.r1) * self.r1.powi(n.n1 as i32) * (one - self.r2) * self.r2.powi(n.n2 as i32)
    }

    pub fn cast<U: Scalar>(&self) -> GeometricProductForm<U> {
        GeometricProductForm { r1: U::lit(self.r1.to_f64_lossy()), r2: U::lit(self.r2.to_f64_lossy()) }
    }
}

/// Outcome of [`verify_geometric_stationarity`].
#[derive(Clone, Debug, PartialEq)]
pub struct StationarityCheck<T> {
    /// `1 − Σ_u p_{k(n+u),−u} r1^{u1} r2^{u2}` at each representative.
    pub residuals: [T; 9],
    pub max_residual: T,
    pub passed: bool,
}

/// Balance residuals divided by `π̄(n)` together with their gradient in `r`.
fn residuals_with_jacobian<T: Scalar>(w: &RandomWalkSpec<T>, r1: T, r2: T) -> ([T; 9], [[T; 2]; 9]) {
    let mut res = [T::zero(); 9];
    let mut jac = [[T::zero(); 2]; 9];
    for (t, &n) in REPRESENTATIVES.iter().enumerate() {
        let mut s = T::zero();
        let mut g = [T::zero(); 2];
        for u in Step::ALL {
            let m = n + u;
            let Ok(km) = component_of(m) else { continue };
            let p = w.p(km, -u);
            if p == T::zero() {
                continue;
            }
            let (a, b) = (u.u1() as i32, u.u2() as i32);
            s = s + p * r1.powi(a) * r2.powi(b);
            g[0] = g[0] + p * T::coord(a.into()) * r1.powi(a - 1) * r2.powi(b);
            g[1] = g[1] + p * T::coord(b.into()) * r1.powi(a) * r2.powi(b - 1);
        }
        res[t] = T::one() - s;
        jac[t] = [-g[0], -g[1]];
    }
    (res, jac)
}

fn max_abs<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Checks that `π̄` solves the balance equations of `w`.
///
/// Dividing the balance equation at `n` by `π̄(n)` leaves an expression
/// that depends on `n` only through the components of its neighbours, and
/// those are constant on each T-component, so nine states cover all of `S`.
pub fn verify_geometric_stationarity<T: Scalar>(
    w: &RandomWalkSpec<T>,
    r: &GeometricProductForm<T>,
    tol: T,
) -> StationarityCheck<T> {
    let (residuals, _) = residuals_with_jacobian(w, r.r1, r.r2);
    let max_residual = max_abs(&residuals);
    StationarityCheck { residuals, max_residual, passed: max_residual <= tol }
}

fn sum_sq<T: Scalar>(v: &[T; 9]) -> T {
    v.iter().map(|&x| x * x).sum()
}

/// Damped Gauss–Newton on the nine residuals from one starting point.
fn gauss_newton<T: Scalar>(w: &RandomWalkSpec<T>, start: (T, T)) -> Option<(T, T)> {
    let (mut r1, mut r2) = start;
    let (mut f, mut jac) = residuals_with_jacobian(w, r1, r2);
    let mut cost = sum_sq(&f);
    let stop = T::lit(1e-13);
    for _ in 0..200 {
        if max_abs(&f) < stop {
            break;
        }
        let (mut a11, mut a12, mut a22, mut g1, mut g2) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
        for t in 0..9 {
            let [j1, j2] = jac[t];
            a11 = a11 + j1 * j1;
            a12 = a12 + j1 * j2;
            a22 = a22 + j2 * j2;
            g1 = g1 + j1 * f[t];
            g2 = g2 + j2 * f[t];
        }
        let det = a11 * a22 - a12 * a12;
        if det.abs() <= T::epsilon() * (a11 * a22).abs().max(T::min_positive_value()) {
            return None;
        }
        let d1 = -(a22 * g1 - a12 * g2) / det;
        let d2 = -(a11 * g2 - a12 * g1) / det;
        let mut step = T::one();
        let mut accepted = false;
        for _ in 0..60 {
            let (c1, c2) = (r1 + step * d1, r2 + step * d2);
            if c1 > T::zero() && c1 < T::one() && c2 > T::zero() && c2 < T::one() {
                let (fc, jc) = residuals_with_jacobian(w, c1, c2);
                let cc = sum_sq(&fc);
                if cc <= cost {
                    r1 = c1;
                    r2 = c2;
                    f = fc;
                    jac = jc;
                    cost = cc;
                    accepted = true;
                    break;
                }
            }
            step = step * T::lit(0.5);
        }
        if !accepted {
            break;
        }
    }
    Some((r1, r2))
}

/// Verification tolerance for solved rates: `1e-10`, loosened for
/// low-precision scalars.
pub(crate) fn rate_tolerance<T: Scalar>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(100.0))
}

/// All distinct verified roots found from a 5×5 grid of starting points.
pub fn solve_rate_pairs<T: Scalar>(w: &RandomWalkSpec<T>) -> Vec<GeometricProductForm<T>> {
    let tol = rate_tolerance::<T>();
    let mut roots: Vec<GeometricProductForm<T>> = Vec::new();
    for a in 0..5 {
        for b in 0..5 {
            let start = (T::lit(0.1 + 0.2 * a as f64), T::lit(0.1 + 0.2 * b as f64));
            let Some((r1, r2)) = gauss_newton(w, start) else { continue };
            let Ok(r) = GeometricProductForm::new(r1, r2) else { continue };
            if !verify_geometric_stationarity(w, &r, tol).passed {
                continue;
            }
            let fresh = roots
                .iter()
                .all(|q| (q.r1 - r1).abs() > T::lit(1e-7) || (q.r2 - r2).abs() > T::lit(1e-7));
            if fresh {
                roots.push(r);
            }
        }
    }
    roots
}

/// Rates of the geometric product form of `w`, verified at all nine
/// representative states.
pub fn solve_rate_pair<T: Scalar>(w: &RandomWalkSpec<T>) -> Result<GeometricProductForm<T>, ModelError> {
    let mut roots = solve_rate_pairs(w);
    match roots.len() {
        0 => Err(ModelError::NoProductForm),
        1 => Ok(roots.pop().expect("one root")),
        _ => Err(ModelError::MultipleRoots(
            roots.iter().map(|r| (r.r1.to_f64_lossy(), r.r2.to_f64_lossy())).collect(),
        )),
    }
}
