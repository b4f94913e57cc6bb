use serde_json::Value;

use super::{Coefficient, PiecewiseError};
use crate::model::{component_of, ComponentId, GeometricProductForm, Point};
use crate::Scalar;

/// Coefficient slot `f_{k,i}` of a C-linear function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    F10,
    F11,
    F20,
    F22,
    F30,
    F40,
    F41,
    F42,
}

impl Slot {
    pub const ALL: [Slot; 8] = [Slot::F10, Slot::F11, Slot::F20, Slot::F22, Slot::F30, Slot::F40, Slot::F41, Slot::F42];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn key(self) -> &'static str {
        ["f10", "f11", "f20", "f22", "f30", "f40", "f41", "f42"][self.index()]
    }

    /// Component and coordinate `(k, i)`; `i = 0` is the constant term.
    pub fn component_and_order(self) -> (ComponentId, usize) {
        use ComponentId::*;
        match self {
            Slot::F10 => (Horizontal, 0),
            Slot::F11 => (Horizontal, 1),
            Slot::F20 => (Vertical, 0),
            Slot::F22 => (Vertical, 2),
            Slot::F30 => (Origin, 0),
            Slot::F40 => (Interior, 0),
            Slot::F41 => (Interior, 1),
            Slot::F42 => (Interior, 2),
        }
    }
}

/// Function on `S` that is linear on each of the four C-components:
/// `F(n) = f_{k,0} + f_{k,1} n1 + f_{k,2} n2` for `k = k(n)`, with the
/// slopes that are meaningless on a component (e.g. `f_{1,2}`) absent.
#[derive(Clone, Debug, PartialEq)]
pub struct CLinear<C> {
    slots: [C; 8],
}

/// Concrete C-linear function.
pub type CLinearFn<T> = CLinear<T>;

impl<C> CLinear<C> {
    pub fn from_slots(slots: [C; 8]) -> Self {
        CLinear { slots }
    }

    pub fn slot(&self, s: Slot) -> &C {
        &self.slots[s.index()]
    }

    pub fn slot_mut(&mut self, s: Slot) -> &mut C {
        &mut self.slots[s.index()]
    }

    pub fn slots(&self) -> &[C; 8] {
        &self.slots
    }

    pub fn map<D>(&self, f: impl FnMut(&C) -> D) -> CLinear<D> {
        CLinear { slots: self.slots.each_ref().map(f) }
    }
}

impl<C: Clone> CLinear<C> {
    /// Linear form `(f0, f1, f2)` of component `k`, zero-filled.
    pub fn form(&self, k: ComponentId) -> [C; 3]
    where
        C: Coefficient,
    {
        let s = |slot: Slot| self.slot(slot).clone();
        let z = C::zero;
        match k {
            ComponentId::Horizontal => [s(Slot::F10), s(Slot::F11), z()],
            ComponentId::Vertical => [s(Slot::F20), z(), s(Slot::F22)],
            ComponentId::Origin => [s(Slot::F30), z(), z()],
            ComponentId::Interior => [s(Slot::F40), s(Slot::F41), s(Slot::F42)],
        }
    }
}

/// Weights `w_s` with `Σ_n π̄(n) F(n) = Σ_s w_s f_s`.
pub fn expectation_weights<T: Scalar>(r: &GeometricProductForm<T>) -> [T; 8] {
    let (r1, r2) = (r.r1(), r.r2());
    let (s1, s2) = (T::one() - r1, T::one() - r2);
    [
        r1 * s2,
        r1 * s2 / s1,
        s1 * r2,
        s1 * r2 / s2,
        s1 * s2,
        r1 * r2,
        r1 * r2 / s1,
        r1 * r2 / s2,
    ]
}

impl<T: Scalar> CLinear<T> {
    pub fn zero() -> Self {
        CLinear { slots: [T::zero(); 8] }
    }

    pub fn with(mut self, s: Slot, value: T) -> Self {
        self.slots[s.index()] = value;
        self
    }

    /// `𝟙{n = 0}`.
    pub fn indicator_origin() -> Self {
        Self::zero().with(Slot::F30, T::one())
    }

    pub fn coordinate(i: usize) -> Self {
        match i {
            1 => Self::zero().with(Slot::F11, T::one()).with(Slot::F41, T::one()),
            2 => Self::zero().with(Slot::F22, T::one()).with(Slot::F42, T::one()),
            _ => panic!("coordinate index must be 1 or 2"),
        }
    }

    pub fn constant(c: T) -> Self {
        Self::zero().with(Slot::F10, c).with(Slot::F20, c).with(Slot::F30, c).with(Slot::F40, c)
    }

    /// Named measures: `indicator_origin`, `n1`, `n2`, `one`.
    pub fn named(id: &str) -> Option<Self> {
        match id {
            "indicator_origin" => Some(Self::indicator_origin()),
            "n1" => Some(Self::coordinate(1)),
            "n2" => Some(Self::coordinate(2)),
            "one" => Some(Self::constant(T::one())),
            _ => None,
        }
    }

    pub fn evaluate(&self, n: Point) -> Result<T, PiecewiseError> {
        let k = component_of(n).map_err(|_| PiecewiseError::OutOfDomain(n))?;
        let [f0, f1, f2] = self.form(k);
        Ok(f0 + f1 * T::coord(n.n1) + f2 * T::coord(n.n2))
    }

    pub fn cast<U: Scalar>(&self) -> CLinear<U> {
        self.map(|&x| U::lit(x.to_f64_lossy()))
    }

    /// Parses `{"f10": .., ..., "f42": ..}` (missing slots are zero) or a
    /// JSON string naming a measure accepted by [`CLinear::named`].
    pub fn from_json(text: &str) -> Result<Self, PiecewiseError> {
        let value: Value = serde_json::from_str(text).map_err(|e| PiecewiseError::Json(e.to_string()))?;
        Self::from_json_value(&value)
    }

    pub fn from_json_value(value: &Value) -> Result<Self, PiecewiseError> {
        match value {
            Value::String(id) => Self::named(id).ok_or_else(|| PiecewiseError::Json(format!("unknown measure `{id}`"))),
            Value::Object(obj) => {
                let mut out = Self::zero();
                for (key, v) in obj {
                    let slot = Slot::ALL
                        .into_iter()
                        .find(|s| s.key() == key)
                        .ok_or_else(|| PiecewiseError::Json(format!("unknown coefficient `{key}`")))?;
                    let x = v.as_f64().ok_or_else(|| PiecewiseError::Json(format!("`{key}` must be a number")))?;
                    out.slots[slot.index()] = T::lit(x);
                }
                Ok(out)
            }
            _ => Err(PiecewiseError::Json("measure must be an object or a name".into())),
        }
    }

    pub fn to_json(&self) -> Value {
        let mut obj = serde_json::Map::new();
        for s in Slot::ALL {
            obj.insert(s.key().into(), Value::from(self.slot(s).to_f64_lossy()));
        }
        Value::Object(obj)
    }
}

impl<C: Coefficient> CLinear<C> {
    /// Closed-form `Σ_n π̄(n) F(n)`.
    pub fn expectation(&self, r: &GeometricProductForm<C::Scalar>) -> C {
        let w = expectation_weights(r);
        let mut out = C::zero();
        for s in Slot::ALL {
            out.axpy(w[s.index()], self.slot(s));
        }
        out
    }

    /// `self + a · other` slotwise.
    pub fn axpy(&mut self, a: C::Scalar, other: &Self) {
        for (x, y) in self.slots.iter_mut().zip(other.slots.iter()) {
            x.axpy(a, y);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::AffineExpr;

    fn r() -> GeometricProductForm<f64> {
        GeometricProductForm::new(0.3, 0.6).unwrap()
    }

    #[test]
    fn evaluate_interior() {
        let f = CLinearFn::<f64>::zero().with(Slot::F40, 2.0).with(Slot::F41, 3.0);
        assert_eq!(f.evaluate(Point::new(5, 7)).unwrap(), 17.0);
        assert_eq!(CLinearFn::<f64>::indicator_origin().evaluate(Point::ORIGIN).unwrap(), 1.0);
        assert!(f.evaluate(Point::new(-1, 0)).is_err());
    }

    #[test]
    fn expectation_examples() {
        let r = r();
        let e: f64 = CLinearFn::indicator_origin().expectation(&r);
        assert!((e - 0.7 * 0.4_f64).abs() < 1e-15);
        assert!((CLinearFn::<f64>::coordinate(1).expectation(&r) - 0.3 / 0.7).abs() < 1e-15);
        assert!((CLinearFn::<f64>::constant(1.0).expectation(&r) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn symbolic_expectation_matches_concrete() {
        let r = r();
        let sym = CLinear::from_slots(std::array::from_fn(|i| AffineExpr::var(crate::piecewise::VarId(i))));
        let e = sym.expectation(&r);
        let x = [0.3, -1.0, 2.0, 0.5, 1.0, 4.0, -0.25, 0.75];
        let concrete = CLinearFn::from_slots(x).expectation(&r);
        assert!((e.eval(&x) - concrete).abs() < 1e-14);
    }

    #[test]
    fn json_round_trip() {
        let f = CLinearFn::<f64>::from_json(r#"{"f30": 1, "f41": 0.5}"#).unwrap();
        assert_eq!(*f.slot(Slot::F41), 0.5);
        let g = CLinearFn::<f64>::from_json(&f.to_json().to_string()).unwrap();
        assert_eq!(f, g);
        assert_eq!(CLinearFn::<f64>::from_json("\"n1\"").unwrap(), CLinearFn::coordinate(1));
        assert!(CLinearFn::<f64>::from_json(r#"{"f12": 1}"#).is_err());
    }
}
