use std::io::{self, Write};

use crate::model::Point;
use crate::Scalar;

/// Dense square grid of values on `[0, side−1]²`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    side: usize,
    data: Vec<T>,
}

impl<T: Scalar> Grid<T> {
    pub fn filled(side: usize, value: T) -> Self {
        Grid { side, data: vec![value; side * side] }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    #[inline]
    pub fn contains(&self, n: Point) -> bool {
        n.n1 >= 0 && n.n2 >= 0 && (n.n1 as usize) < self.side && (n.n2 as usize) < self.side
    }

    #[inline]
    pub(crate) fn idx(&self, n1: usize, n2: usize) -> usize {
        n1 * self.side + n2
    }

    #[inline]
    pub fn at(&self, n1: usize, n2: usize) -> T {
        self.data[self.idx(n1, n2)]
    }

    /// Value at `n`, or `None` outside the grid.
    pub fn get(&self, n: Point) -> Option<T> {
        self.contains(n).then(|| self.at(n.n1 as usize, n.n2 as usize))
    }

    #[inline]
    pub(crate) fn set(&mut self, n1: usize, n2: usize, v: T) {
        let i = self.idx(n1, n2);
        self.data[i] = v;
    }

    pub fn values(&self) -> &[T] {
        &self.data
    }

    pub(crate) fn values_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn points(&self) -> impl Iterator<Item = Point> {
        let side = self.side as i64;
        (0..side).flat_map(move |a| (0..side).map(move |b| Point::new(a, b)))
    }

    /// Writes `n1,n2,value` rows with a header.
    pub fn write_csv(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "n1,n2,value")?;
        for a in 0..self.side {
            for b in 0..self.side {
                writeln!(out, "{a},{b},{:.12e}", self.at(a, b))?;
            }
        }
        Ok(())
    }
}
