use serde_json::Value;

use crate::model::{ComponentId, RandomWalkSpec, Step};
use crate::Scalar;

/// `k[i] = k(n + e_i)` for any `n` in component `k`.
pub fn k_bracket(i: usize, k: ComponentId) -> ComponentId {
    use ComponentId::*;
    match (i, k) {
        (1, Horizontal) | (1, Origin) => Horizontal,
        (1, Vertical) | (1, Interior) => Interior,
        (2, Vertical) | (2, Origin) => Vertical,
        (2, Horizontal) | (2, Interior) => Interior,
        _ => panic!("k_bracket: i must be 1 or 2"),
    }
}

/// Constants `c_{i,k,j,u}` expressing the bias term `D_i^{t+1}(n)`,
/// `k = k(n)`, as `F(n+e_i) − F(n) + Σ_{j,u} c_{i,k,j,u} D_j^t(n+u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTable<T> {
    c: [[[[T; 9]; 2]; 4]; 2],
}

impl<T: Scalar> CoefficientTable<T> {
    pub fn zero() -> Self {
        CoefficientTable { c: [[[[T::zero(); 9]; 2]; 4]; 2] }
    }

    /// # Panics
    /// If `i` or `j` is not 1 or 2.
    #[inline]
    pub fn get(&self, i: usize, k: ComponentId, j: usize, u: Step) -> T {
        self.c[i - 1][k.index()][j - 1][u.index()]
    }

    pub fn set(&mut self, i: usize, k: ComponentId, j: usize, u: Step, value: T) {
        self.c[i - 1][k.index()][j - 1][u.index()] = value;
    }

    /// Nonzero entries `(j, u, c)` for a given `(i, k)`.
    pub fn entries(&self, i: usize, k: ComponentId) -> impl Iterator<Item = (usize, Step, T)> + '_ {
        (1..=2).flat_map(move |j| {
            Step::ALL.into_iter().filter_map(move |u| {
                let c = self.get(i, k, j, u);
                (c != T::zero()).then_some((j, u, c))
            })
        })
    }

    pub fn max_abs(&self) -> T {
        self.c.iter().flatten().flatten().flatten().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Fills the universal table from the transition probabilities of `w`.
    ///
    /// Rows for `(i, k) = (1, 4)`, `(2, 4)`, `(1, 1)` and `(2, 2)` copy the
    /// kernel of `k`; the remaining rows are chains of probability
    /// differences, evaluated in dependency order. Unlisted slots are zero.
    pub fn from_table1(w: &RandomWalkSpec<T>) -> Self {
        use ComponentId::{Horizontal as C1, Interior as C4, Origin as C3, Vertical as C2};
        let p = |k, u| w.p(k, u);
        let (e1, e2, d1, d2, z) = (Step::E1, Step::E2, Step::D1, Step::D2, Step::ZERO);
        let mut t = Self::zero();

        for &u in C1.neighbors() {
            t.set(1, C1, 1, u, p(C1, u));
        }
        for u in [d1, e1, d2] {
            t.set(1, C2, 1, u, p(C4, u));
        }
        t.set(1, C2, 1, e2, p(C4, e2) - p(C2, d1) + t.get(1, C2, 1, d1));
        t.set(1, C2, 1, z, p(C4, z) - p(C2, e1) + t.get(1, C2, 1, e1));
        t.set(1, C2, 1, -e2, p(C4, -e2) - p(C2, d2) + t.get(1, C2, 1, d2));
        t.set(1, C2, 2, z, p(C4, -d2) - p(C2, e2) + t.get(1, C2, 1, e2));
        t.set(1, C2, 2, -e2, p(C4, -e1) - p(C2, z) + t.get(1, C2, 2, z) + t.get(1, C2, 1, z));
        for u in [e1, d1] {
            t.set(1, C3, 1, u, p(C1, u));
        }
        t.set(1, C3, 1, e2, p(C1, e2) - p(C3, d1) + t.get(1, C3, 1, d1));
        t.set(1, C3, 1, z, p(C1, z) - p(C3, e1) + t.get(1, C3, 1, e1));
        t.set(1, C3, 2, z, p(C1, -d2) - p(C3, e2) + t.get(1, C3, 1, e2));
        for u in Step::ALL {
            t.set(1, C4, 1, u, p(C4, u));
        }

        for u in [d1, e2, -d2] {
            t.set(2, C1, 2, u, p(C4, u));
        }
        t.set(2, C1, 2, e1, p(C4, e1) - p(C1, d1) + t.get(2, C1, 2, d1));
        t.set(2, C1, 2, z, p(C4, z) - p(C1, e2) + t.get(2, C1, 2, e2));
        t.set(2, C1, 2, -e1, p(C4, -e1) - p(C1, -d2) + t.get(2, C1, 2, -d2));
        t.set(2, C1, 1, z, p(C4, d2) - p(C1, e1) + t.get(2, C1, 2, e1));
        t.set(2, C1, 1, -e1, p(C4, -e2) - p(C1, z) + t.get(2, C1, 1, z) + t.get(2, C1, 2, z));
        for &u in C2.neighbors() {
            t.set(2, C2, 2, u, p(C2, u));
        }
        for u in [d1, e2] {
            t.set(2, C3, 2, u, p(C2, u));
        }
        t.set(2, C3, 2, e1, p(C2, e1) - p(C3, d1) + t.get(2, C3, 2, d1));
        t.set(2, C3, 2, z, p(C2, z) - p(C3, e2) + t.get(2, C3, 2, e2));
        t.set(2, C3, 1, z, p(C2, d2) - p(C3, e1) + t.get(2, C3, 2, e1));
        for u in Step::ALL {
            t.set(2, C4, 2, u, p(C4, u));
        }
        t
    }

    /// Full table keyed `"c[i][k][j][u1,u2]"`, restricted to `u ∈ N_k`.
    pub fn to_json(&self) -> Value {
        let mut obj = serde_json::Map::new();
        for i in 1..=2 {
            for k in ComponentId::ALL {
                for j in 1..=2 {
                    for &u in k.neighbors() {
                        let key = format!("c[{i}][{}][{j}][{},{}]", k.number(), u.u1(), u.u2());
                        obj.insert(key, Value::from(self.get(i, k, j, u).to_f64_lossy()));
                    }
                }
            }
        }
        Value::Object(obj)
    }
}
