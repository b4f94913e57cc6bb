use std::fmt;

use super::{CLinear, Coefficient, PiecewiseError};
use crate::model::{component_of, ComponentId, Point, Step};
use crate::Scalar;

/// One of the nine T-components refining the C-partition: coordinates
/// 0, 1 and "≥ 2" in each direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TComponentId(u8);

impl TComponentId {
    pub const ALL: [TComponentId; 9] = [
        TComponentId(0),
        TComponentId(1),
        TComponentId(2),
        TComponentId(3),
        TComponentId(4),
        TComponentId(5),
        TComponentId(6),
        TComponentId(7),
        TComponentId(8),
    ];

    /// From the 1-based number `1..=9`.
    pub fn from_number(t: usize) -> Option<Self> {
        (1..=9).contains(&t).then(|| TComponentId((t - 1) as u8))
    }

    pub fn number(self) -> usize {
        self.0 as usize + 1
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn of(n: Point) -> Result<Self, PiecewiseError> {
        if !n.in_quarter_plane() {
            return Err(PiecewiseError::OutOfDomain(n));
        }
        Ok(TComponentId((n.n1.min(2) + 3 * n.n2.min(2)) as u8))
    }

    /// Corner point: `(a, b)` with `a, b ∈ {0, 1, 2}`.
    pub fn representative(self) -> Point {
        Point::new(i64::from(self.0 % 3), i64::from(self.0 / 3))
    }

    /// Whether the component extends to infinity along coordinate `i`.
    pub fn unbounded_in(self, i: usize) -> bool {
        let rep = self.representative();
        match i {
            1 => rep.n1 == 2,
            2 => rep.n2 == 2,
            _ => false,
        }
    }

    pub fn c_component(self) -> ComponentId {
        component_of(self.representative()).expect("representatives lie in S")
    }
}

impl fmt::Display for TComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}", self.number())
    }
}

/// Subset of T-components, as a bit mask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TDomain(u16);

impl TDomain {
    pub const FULL: TDomain = TDomain(0x1ff);
    pub const EMPTY: TDomain = TDomain(0);

    pub fn from_components(ts: impl IntoIterator<Item = TComponentId>) -> Self {
        TDomain(ts.into_iter().fold(0, |m, t| m | (1 << t.0)))
    }

    /// T-components whose points stay in `S` after a step `u`, i.e. `S ∩ (S − u)`.
    pub fn shifted(u: Step) -> Self {
        Self::from_components(TComponentId::ALL.into_iter().filter(|t| (t.representative() + u).in_quarter_plane()))
    }

    pub fn contains(self, t: TComponentId) -> bool {
        self.0 & (1 << t.0) != 0
    }

    pub fn intersect(self, other: TDomain) -> TDomain {
        TDomain(self.0 & other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = TComponentId> {
        TComponentId::ALL.into_iter().filter(move |&t| self.contains(t))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

/// Function linear on each T-component of its domain:
/// `h(n) = h_{t,0} + h_{t,1} n1 + h_{t,2} n2` for `t = t(n)`.
/// Slots outside the domain are kept at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct TLinear<C> {
    slots: [[C; 3]; 9],
    domain: TDomain,
}

/// Concrete T-linear function.
pub type TLinearFn<T> = TLinear<T>;

/// Which nonnegativity condition a row encodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RowKind {
    /// Value at the component's corner point.
    Corner,
    /// Slope along coordinate `i` of an unbounded component.
    Ray(usize),
}

/// A linear inequality `expr ≥ 0` together with its origin.
#[derive(Clone, Debug, PartialEq)]
pub struct NonnegRow<C> {
    pub t: TComponentId,
    pub kind: RowKind,
    pub expr: C,
}

impl<C: Coefficient> TLinear<C> {
    pub fn zero(domain: TDomain) -> Self {
        TLinear { slots: std::array::from_fn(|_| std::array::from_fn(|_| C::zero())), domain }
    }

    /// Builds from explicit slots; slots outside `domain` are zeroed.
    pub fn from_slots(mut slots: [[C; 3]; 9], domain: TDomain) -> Self {
        for t in TComponentId::ALL {
            if !domain.contains(t) {
                slots[t.index()] = std::array::from_fn(|_| C::zero());
            }
        }
        TLinear { slots, domain }
    }

    pub fn domain(&self) -> TDomain {
        self.domain
    }

    pub fn slots(&self, t: TComponentId) -> &[C; 3] {
        &self.slots[t.index()]
    }

    /// `C(n + u)` as a T-linear function of `n`, defined where `n + u ∈ S`.
    pub fn shift(h: &CLinear<C>, u: Step) -> Self {
        let domain = TDomain::shifted(u);
        let mut out = Self::zero(domain);
        let (u1, u2) = (<C::Scalar>::coord(u.u1()), <C::Scalar>::coord(u.u2()));
        for t in domain.iter() {
            let k = component_of(t.representative() + u).expect("domain keeps n + u in S");
            let [f0, f1, f2] = h.form(k);
            let mut c0 = f0;
            c0.axpy(u1, &f1);
            c0.axpy(u2, &f2);
            out.slots[t.index()] = [c0, f1, f2];
        }
        out
    }

    /// The C-linear function read on the finer partition.
    pub fn embed(h: &CLinear<C>) -> Self {
        Self::shift(h, Step::ZERO)
    }

    /// Same function restricted to `self.domain ∩ domain`.
    pub fn restrict(mut self, domain: TDomain) -> Self {
        self.domain = self.domain.intersect(domain);
        for t in TComponentId::ALL {
            if !self.domain.contains(t) {
                self.slots[t.index()] = std::array::from_fn(|_| C::zero());
            }
        }
        self
    }

    /// `self += w(t) · other` on every `t` of `self`'s domain with a nonzero
    /// weight.
    ///
    /// # Panics
    /// If `other` is undefined at such a `t`.
    pub fn add_weighted(&mut self, w: impl Fn(TComponentId) -> C::Scalar, other: &TLinear<C>) {
        for t in self.domain.iter() {
            let a = w(t);
            if a == <C::Scalar>::zero() {
                continue;
            }
            assert!(other.domain.contains(t), "term undefined on {t}");
            for i in 0..3 {
                self.slots[t.index()][i].axpy(a, &other.slots[t.index()][i]);
            }
        }
    }

    pub fn add_scaled(&mut self, a: C::Scalar, other: &TLinear<C>) {
        self.add_weighted(|_| a, other)
    }

    /// Finitely many inequalities equivalent to `h(n) ≥ 0` on the domain:
    /// the value at each corner point and the slope along each unbounded
    /// direction must be nonnegative.
    pub fn nonneg_inequalities(&self) -> Vec<NonnegRow<C>> {
        let mut rows = Vec::with_capacity(15);
        for t in self.domain.iter() {
            let rep = t.representative();
            let [h0, h1, h2] = &self.slots[t.index()];
            let mut corner = h0.clone();
            corner.axpy(<C::Scalar>::coord(rep.n1), h1);
            corner.axpy(<C::Scalar>::coord(rep.n2), h2);
            rows.push(NonnegRow { t, kind: RowKind::Corner, expr: corner });
            for (i, h) in [(1, h1), (2, h2)] {
                if t.unbounded_in(i) {
                    rows.push(NonnegRow { t, kind: RowKind::Ray(i), expr: h.clone() });
                }
            }
        }
        rows
    }

    pub fn map<D>(&self, mut f: impl FnMut(&C) -> D) -> TLinear<D> {
        TLinear { slots: self.slots.each_ref().map(|s| s.each_ref().map(&mut f)), domain: self.domain }
    }
}

impl<T: Scalar> TLinear<T> {
    pub fn evaluate(&self, n: Point) -> Result<T, PiecewiseError> {
        let t = TComponentId::of(n)?;
        if !self.domain.contains(t) {
            return Err(PiecewiseError::OutOfDomain(n));
        }
        let [h0, h1, h2] = self.slots[t.index()];
        Ok(h0 + h1 * T::coord(n.n1) + h2 * T::coord(n.n2))
    }

    /// A point where `h` is negative, given a violated row of
    /// [`TLinear::nonneg_inequalities`].
    ///
    /// Corner rows are witnessed by the corner itself; a negative slope
    /// along coordinate `i` by walking far enough along that ray.
    pub fn witness(&self, row: &NonnegRow<T>) -> Option<Point> {
        if row.expr >= T::zero() {
            return None;
        }
        let rep = row.t.representative();
        match row.kind {
            RowKind::Corner => Some(rep),
            RowKind::Ray(i) => {
                let [h0, h1, h2] = self.slots[row.t.index()];
                let (slope, rest) = if i == 1 { (h1, h0 + h2 * T::coord(rep.n2)) } else { (h2, h0 + h1 * T::coord(rep.n1)) };
                let reach = (rest / -slope).floor().to_f64_lossy();
                let far = if reach.is_finite() && reach < 1e15 { (reach as i64 + 1).max(2) } else { return None };
                Some(if i == 1 { Point::new(far, rep.n2) } else { Point::new(rep.n1, far) })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::{AffineExpr, CLinearFn, Slot, VarId};

    #[test]
    fn embed_indicator() {
        let h = TLinear::embed(&CLinearFn::<f64>::indicator_origin());
        for t in TComponentId::ALL {
            let expect = if t.number() == 1 { [1.0, 0.0, 0.0] } else { [0.0; 3] };
            assert_eq!(h.slots(t), &expect, "{t}");
        }
    }

    #[test]
    fn embed_coordinate() {
        let h = TLinear::embed(&CLinearFn::<f64>::coordinate(1));
        let with_slope: Vec<usize> = TComponentId::ALL.into_iter().filter(|&t| h.slots(t)[1] == 1.0).map(|t| t.number()).collect();
        assert_eq!(with_slope, vec![2, 3, 5, 6, 8, 9]);
        assert_eq!(TLinear::embed(&CLinearFn::<f64>::zero()), TLinear::zero(TDomain::FULL));
    }

    #[test]
    fn shift_examples() {
        let h = CLinearFn::<f64>::zero().with(Slot::F41, 1.0);
        let s = TLinear::shift(&h, Step::NEG_E1);
        assert_eq!(s.slots(TComponentId::from_number(9).unwrap()), &[-1.0, 1.0, 0.0]);
        let s = TLinear::shift(&CLinearFn::<f64>::indicator_origin(), Step::NEG_D1);
        assert_eq!(s.domain(), TDomain::from_components([5, 6, 8, 9].map(|t| TComponentId::from_number(t).unwrap())));
        assert_eq!(s.evaluate(Point::new(1, 1)).unwrap(), 1.0);
        assert_eq!(s.slots(TComponentId::from_number(5).unwrap()), &[1.0, 0.0, 0.0]);
        for t in [6, 8, 9] {
            assert_eq!(s.slots(TComponentId::from_number(t).unwrap()), &[0.0; 3]);
        }
        assert!(s.evaluate(Point::new(0, 4)).is_err());
    }

    #[test]
    fn inequality_counts() {
        let sym = TLinear::<AffineExpr<f64>>::embed(&CLinear::from_slots(std::array::from_fn(|i| AffineExpr::var(VarId(i)))));
        assert_eq!(sym.nonneg_inequalities().len(), 15);
        assert_eq!(TLinear::<AffineExpr<f64>>::zero(TDomain::shifted(Step::NEG_D1)).nonneg_inequalities().len(), 8);
    }

    #[test]
    fn negative_constant_detected() {
        let h = TLinear::embed(&CLinearFn::<f64>::coordinate(1).with(Slot::F10, -2.0).with(Slot::F30, -2.0).with(Slot::F40, -2.0).with(Slot::F20, -2.0));
        let rows = h.nonneg_inequalities();
        assert_eq!(rows[0].expr, -2.0);
        assert_eq!(h.witness(&rows[0]), Some(Point::ORIGIN));
    }

    #[test]
    fn ray_witness() {
        let mut slots = [[1.0; 3]; 9];
        slots[8] = [10.0, -0.5, 1.0];
        let h = TLinear::from_slots(slots, TDomain::FULL);
        let row = h.nonneg_inequalities().into_iter().find(|r| r.t.number() == 9 && r.kind == RowKind::Ray(1)).unwrap();
        let n = h.witness(&row).unwrap();
        assert!(h.evaluate(n).unwrap() < 0.0, "{n}");
        assert_eq!(n.n2, 2);
    }

    #[test]
    fn t_component_of() {
        assert_eq!(TComponentId::of(Point::new(7, 0)).unwrap().number(), 3);
        assert_eq!(TComponentId::of(Point::new(1, 9)).unwrap().number(), 8);
        assert_eq!(TComponentId::of(Point::new(3, 1)).unwrap().number(), 6);
        for t in TComponentId::ALL {
            assert_eq!(TComponentId::of(t.representative()).unwrap(), t);
        }
    }
}
