use std::fmt;
use std::ops::{Add, Neg};

use super::ModelError;

/// Nearest-neighbour jump `u ∈ {-1,0,1}²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    u1: i8,
    u2: i8,
}

impl Step {
    pub const ZERO: Step = Step { u1: 0, u2: 0 };
    pub const E1: Step = Step { u1: 1, u2: 0 };
    pub const E2: Step = Step { u1: 0, u2: 1 };
    pub const D1: Step = Step { u1: 1, u2: 1 };
    pub const D2: Step = Step { u1: 1, u2: -1 };
    pub const NEG_E1: Step = Step { u1: -1, u2: 0 };
    pub const NEG_E2: Step = Step { u1: 0, u2: -1 };
    pub const NEG_D1: Step = Step { u1: -1, u2: -1 };
    pub const NEG_D2: Step = Step { u1: -1, u2: 1 };

    /// All nine directions, in [`Step::index`] order.
    pub const ALL: [Step; 9] = [
        Step { u1: -1, u2: -1 },
        Step { u1: -1, u2: 0 },
        Step { u1: -1, u2: 1 },
        Step { u1: 0, u2: -1 },
        Step { u1: 0, u2: 0 },
        Step { u1: 0, u2: 1 },
        Step { u1: 1, u2: -1 },
        Step { u1: 1, u2: 0 },
        Step { u1: 1, u2: 1 },
    ];

    pub fn new(u1: i64, u2: i64) -> Result<Self, ModelError> {
        if (-1..=1).contains(&u1) && (-1..=1).contains(&u2) {
            Ok(Step { u1: u1 as i8, u2: u2 as i8 })
        } else {
            Err(ModelError::InvalidStep(u1, u2))
        }
    }

    /// Unit vector `e_i` for `i ∈ {1, 2}`.
    pub fn unit(i: usize) -> Step {
        match i {
            1 => Step::E1,
            2 => Step::E2,
            _ => panic!("unit direction index must be 1 or 2, got {i}"),
        }
    }

    #[inline]
    pub fn u1(self) -> i64 {
        self.u1 as i64
    }

    #[inline]
    pub fn u2(self) -> i64 {
        self.u2 as i64
    }

    /// Dense index in `0..9`.
    #[inline]
    pub fn index(self) -> usize {
        ((self.u1 + 1) * 3 + (self.u2 + 1)) as usize
    }

    pub fn from_index(index: usize) -> Step {
        Step::ALL[index]
    }

    pub fn is_unit_or_zero(self) -> bool {
        self.u1 == 0 || self.u2 == 0
    }

    /// Key used in JSON model files.
    pub fn key(self) -> &'static str {
        match (self.u1, self.u2) {
            (1, 0) => "e1",
            (0, 1) => "e2",
            (-1, 0) => "-e1",
            (0, -1) => "-e2",
            (1, 1) => "d1",
            (-1, -1) => "-d1",
            (1, -1) => "d2",
            (-1, 1) => "-d2",
            _ => "0",
        }
    }

    pub fn from_key(key: &str) -> Option<Step> {
        Step::ALL.into_iter().find(|s| s.key() == key)
    }
}

impl Neg for Step {
    type Output = Step;
    fn neg(self) -> Step {
        Step { u1: -self.u1, u2: -self.u2 }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Lattice point `n = (n1, n2)`; not necessarily inside the quarter-plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub n1: i64,
    pub n2: i64,
}

impl Point {
    pub const ORIGIN: Point = Point { n1: 0, n2: 0 };

    pub const fn new(n1: i64, n2: i64) -> Self {
        Point { n1, n2 }
    }

    #[inline]
    pub fn in_quarter_plane(self) -> bool {
        self.n1 >= 0 && self.n2 >= 0
    }
}

impl Add<Step> for Point {
    type Output = Point;
    fn add(self, u: Step) -> Point {
        Point::new(self.n1 + u.u1(), self.n2 + u.u2())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.n1, self.n2)
    }
}

/// One of the four components of the C-partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComponentId {
    /// `C1 = {1,2,..} × {0}`
    Horizontal = 1,
    /// `C2 = {0} × {1,2,..}`
    Vertical = 2,
    /// `C3 = {(0,0)}`
    Origin = 3,
    /// `C4 = {1,2,..}²`
    Interior = 4,
}

const N1: [Step; 6] = [
    Step::NEG_E1,
    Step::ZERO,
    Step::E1,
    Step::NEG_D2,
    Step::E2,
    Step::D1,
];
const N2: [Step; 6] = [
    Step::NEG_E2,
    Step::ZERO,
    Step::E2,
    Step::D2,
    Step::E1,
    Step::D1,
];
const N3: [Step; 4] = [Step::ZERO, Step::E1, Step::E2, Step::D1];

impl ComponentId {
    pub const ALL: [ComponentId; 4] = [
        ComponentId::Horizontal,
        ComponentId::Vertical,
        ComponentId::Origin,
        ComponentId::Interior,
    ];

    /// 1-based number `k`.
    #[inline]
    pub fn number(self) -> usize {
        self as usize
    }

    /// 0-based index for dense tables.
    #[inline]
    pub fn index(self) -> usize {
        self as usize - 1
    }

    pub fn from_number(k: usize) -> Option<Self> {
        ComponentId::ALL.get(k.wrapping_sub(1)).copied()
    }

    /// Neighbour set `N_k`.
    pub fn neighbors(self) -> &'static [Step] {
        match self {
            ComponentId::Horizontal => &N1,
            ComponentId::Vertical => &N2,
            ComponentId::Origin => &N3,
            ComponentId::Interior => &Step::ALL,
        }
    }

    /// Whether `u ∈ N_k`.
    #[inline]
    pub fn allows(self, u: Step) -> bool {
        match self {
            ComponentId::Horizontal => u.u2 >= 0,
            ComponentId::Vertical => u.u1 >= 0,
            ComponentId::Origin => u.u1 >= 0 && u.u2 >= 0,
            ComponentId::Interior => true,
        }
    }
}

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Component `k(n)` of a state in the quarter-plane.
pub fn component_of(n: Point) -> Result<ComponentId, ModelError> {
    match (n.n1, n.n2) {
        (a, b) if a < 0 || b < 0 => Err(ModelError::OutsideQuarterPlane(n)),
        (0, 0) => Ok(ComponentId::Origin),
        (_, 0) => Ok(ComponentId::Horizontal),
        (0, _) => Ok(ComponentId::Vertical),
        _ => Ok(ComponentId::Interior),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components_of_examples() {
        assert_eq!(component_of(Point::new(0, 0)).unwrap(), ComponentId::Origin);
        assert_eq!(component_of(Point::new(5, 0)).unwrap(), ComponentId::Horizontal);
        assert_eq!(component_of(Point::new(3, 7)).unwrap(), ComponentId::Interior);
        assert_eq!(component_of(Point::new(0, 2)).unwrap(), ComponentId::Vertical);
        assert!(component_of(Point::new(-1, 2)).is_err());
    }

    #[test]
    fn step_indexing_round_trips() {
        for (i, s) in Step::ALL.iter().enumerate() {
            assert_eq!(s.index(), i);
            assert_eq!(Step::from_key(s.key()), Some(*s));
        }
        assert_eq!(-Step::D1, Step::NEG_D1);
        assert_eq!(Step::D2.key(), "d2");
        assert!(Step::new(2, 0).is_err());
    }

    #[test]
    fn neighbour_sets_match_allows() {
        for k in ComponentId::ALL {
            let listed: Vec<Step> = Step::ALL.into_iter().filter(|u| k.allows(*u)).collect();
            let mut n = k.neighbors().to_vec();
            n.sort();
            assert_eq!(n, listed, "k={k}");
        }
        assert_eq!(ComponentId::Interior.neighbors().len(), 9);
        assert_eq!(ComponentId::Origin.neighbors().len(), 4);
    }

    #[test]
    fn neighbours_stay_in_quarter_plane() {
        for n in [Point::new(0, 0), Point::new(4, 0), Point::new(0, 3), Point::new(2, 2)] {
            let k = component_of(n).unwrap();
            for &u in k.neighbors() {
                assert!((n + u).in_quarter_plane());
            }
        }
    }
}
