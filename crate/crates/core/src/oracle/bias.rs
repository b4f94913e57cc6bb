use super::{Grid, OracleError};
use crate::model::{component_of, ComponentId, Point, RandomWalkSpec, Step};
use crate::piecewise::CLinearFn;
use crate::Scalar;

/// Finite-horizon cumulative rewards `F^t(n) = F(n) + Σ_u p_{k(n),u} F^{t−1}(n+u)`
/// on `[0, M]²`, advanced one step at a time.
///
/// Jumps leaving the box are clamped back to the current state, so `F^t` is
/// exact only on `[0, M−t+1]²`; bias terms `D_i^t` are exact on the safe
/// region `[0, M−t]²` (`[0, M−1]²` at `t = 0`, where they vanish).
#[derive(Clone, Debug)]
pub struct ValueIteration<T> {
    kernel: [Vec<(Step, T)>; 4],
    reward: Grid<T>,
    current: Grid<T>,
    scratch: Grid<T>,
    t: usize,
    m: usize,
}

impl<T: Scalar> ValueIteration<T> {
    /// Starts from `F^0 ≡ 0`.
    pub fn new(w: &RandomWalkSpec<T>, f: &CLinearFn<T>, m: usize) -> Self {
        let side = m + 1;
        let mut reward = Grid::filled(side, T::zero());
        for n in reward.points().collect::<Vec<_>>() {
            reward.set(n.n1 as usize, n.n2 as usize, f.evaluate(n).expect("grid lies in S"));
        }
        let kernel = ComponentId::ALL.map(|k| w.jumps(k).collect());
        let zero = Grid::filled(side, T::zero());
        ValueIteration { kernel, reward, current: zero.clone(), scratch: zero, t: 0, m }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `F^t` on the whole box.
    pub fn values(&self) -> &Grid<T> {
        &self.current
    }

    /// Largest coordinate of the safe region, `M − max(t, 1)`, if nonnegative.
    pub fn safe_extent(&self) -> Option<usize> {
        self.m.checked_sub(self.t.max(1))
    }

    pub fn step(&mut self) {
        let side = self.m + 1;
        let m = self.m as i64;
        for a in 0..side {
            for b in 0..side {
                let n = Point::new(a as i64, b as i64);
                let k = component_of(n).expect("grid lies in S");
                let mut acc = self.reward.at(a, b);
                for &(u, p) in &self.kernel[k.index()] {
                    let mut target = n + u;
                    if target.n1 > m || target.n2 > m {
                        target = n;
                    }
                    acc = acc + p * self.current.at(target.n1 as usize, target.n2 as usize);
                }
                self.scratch.set(a, b, acc);
            }
        }
        std::mem::swap(&mut self.current, &mut self.scratch);
        self.t += 1;
    }

    /// `D_i^t(n) = F^t(n + e_i) − F^t(n)`; `None` outside the safe region.
    #[inline]
    pub fn d(&self, i: usize, n: Point) -> Option<T> {
        let extent = self.safe_extent()? as i64;
        if n.n1 < 0 || n.n2 < 0 || n.n1 > extent || n.n2 > extent {
            return None;
        }
        let next = n + Step::unit(i);
        let (a, b) = (n.n1 as usize, n.n2 as usize);
        Some(self.current.at(next.n1 as usize, next.n2 as usize) - self.current.at(a, b))
    }

    pub fn bias_field(&self) -> Option<BiasField<T>> {
        let extent = self.safe_extent()?;
        let mut d1 = Grid::filled(extent + 1, T::zero());
        let mut d2 = d1.clone();
        for a in 0..=extent {
            for b in 0..=extent {
                let n = Point::new(a as i64, b as i64);
                d1.set(a, b, self.d(1, n).expect("inside safe region"));
                d2.set(a, b, self.d(2, n).expect("inside safe region"));
            }
        }
        Some(BiasField { t: self.t, m: self.m, d1, d2 })
    }
}

/// Bias terms `D_1^t`, `D_2^t` on the safe region `[0, M−t]²`.
#[derive(Clone, Debug, PartialEq)]
pub struct BiasField<T> {
    pub t: usize,
    pub m: usize,
    pub d1: Grid<T>,
    pub d2: Grid<T>,
}

impl<T: Scalar> BiasField<T> {
    pub fn d(&self, i: usize, n: Point) -> Option<T> {
        match i {
            1 => self.d1.get(n),
            2 => self.d2.get(n),
            _ => None,
        }
    }
}

/// Bias terms at horizon `t` computed on `[0, M]²`.
pub fn bias_field<T: Scalar>(w: &RandomWalkSpec<T>, f: &CLinearFn<T>, t: usize, m: usize) -> Result<BiasField<T>, OracleError> {
    if m < t + 1 {
        return Err(OracleError::HorizonTooLong { t, m });
    }
    let mut vi = ValueIteration::new(w, f, m);
    for _ in 0..t {
        vi.step();
    }
    Ok(vi.bias_field().expect("m ≥ t"))
}
