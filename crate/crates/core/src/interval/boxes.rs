use std::fmt;
use std::ops::{Deref, DerefMut};

use super::Interval;

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 3;

/// A point in R^d, d ≤ 3, stored inline.
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    coords: [f64; MAX_DIM],
    dim: usize,
}

impl Point {
    pub fn new(coords: &[f64]) -> Point {
        assert!(
            !coords.is_empty() && coords.len() <= MAX_DIM,
            "point dimension must be 1..={MAX_DIM}"
        );
        let mut c = [0.0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Point { coords: c, dim: coords.len() }
    }

    pub fn zeros(dim: usize) -> Point {
        Point::new(&[0.0; MAX_DIM][..dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(&self, other: &[f64]) -> f64 {
        self.iter().zip(other).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    /// `self + s * v`
    pub fn offset(&self, v: &[f64], s: f64) -> Point {
        let mut p = *self;
        for (c, d) in p.iter_mut().zip(v) {
            *c += s * d;
        }
        p
    }

    pub fn sub(&self, other: &[f64]) -> Point {
        self.offset(other, -1.0)
    }

    pub fn scale(&self, s: f64) -> Point {
        let mut p = *self;
        p.iter_mut().for_each(|c| *c *= s);
        p
    }

    /// Unit vector along `self`; `None` for the zero vector.
    pub fn normalized(&self) -> Option<Point> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self.scale(1.0 / n))
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.coords[..self.dim]
    }
}

impl DerefMut for Point {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.coords[..self.dim]
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("cannot subdivide a box of zero width")]
pub struct SubdivideError;

/// Cartesian product of `dim` intervals.
#[derive(Clone, Copy, PartialEq)]
pub struct IntervalBox {
    dims: [Interval; MAX_DIM],
    dim: usize,
}

impl IntervalBox {
    pub fn new(dims: &[Interval]) -> IntervalBox {
        assert!(!dims.is_empty() && dims.len() <= MAX_DIM);
        let mut d = [Interval::ZERO; MAX_DIM];
        d[..dims.len()].copy_from_slice(dims);
        IntervalBox { dims: d, dim: dims.len() }
    }

    pub fn from_bounds(bounds: &[(f64, f64)]) -> IntervalBox {
        let dims: Vec<Interval> = bounds.iter().map(|&(lo, hi)| Interval::new(lo, hi)).collect();
        IntervalBox::new(&dims)
    }

    /// Degenerate box holding a single point.
    pub fn from_point(p: &[f64]) -> IntervalBox {
        let dims: Vec<Interval> = p.iter().map(|&c| Interval::point(c)).collect();
        IntervalBox::new(&dims)
    }

    /// Axis-aligned cube centered at `c` with the given half side length.
    pub fn cube(c: &[f64], half_side: f64) -> IntervalBox {
        let dims: Vec<Interval> = c
            .iter()
            .map(|&x| Interval::new(x - half_side, x + half_side))
            .collect();
        IntervalBox::new(&dims)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.iter().any(|iv| iv.is_empty())
    }

    /// Largest side length.
    pub fn width(&self) -> f64 {
        self.iter().map(|iv| iv.width()).fold(0.0, f64::max)
    }

    pub fn volume(&self) -> f64 {
        self.iter().map(|iv| iv.width()).product()
    }

    pub fn midpoint(&self) -> Point {
        let mut p = Point::zeros(self.dim);
        for (c, iv) in p.iter_mut().zip(self.iter()) {
            *c = iv.mid();
        }
        p
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        self.iter().zip(p).all(|(iv, &c)| iv.contains(c))
    }

    pub fn intersect(&self, other: &IntervalBox) -> IntervalBox {
        let mut out = *self;
        for (a, b) in out.iter_mut().zip(other.iter()) {
            *a = a.intersect(b);
        }
        out
    }

    /// Bisects the widest dimension at its midpoint; ties go to the lowest
    /// index.
    pub fn subdivide(&self) -> Result<(IntervalBox, IntervalBox), SubdivideError> {
        let mut axis = 0;
        let mut best = -1.0;
        for (i, iv) in self.iter().enumerate() {
            if iv.width() > best {
                best = iv.width();
                axis = i;
            }
        }
        if !(best > 0.0) {
            return Err(SubdivideError);
        }
        let iv = self.dims[axis];
        let m = iv.mid();
        if m <= iv.lo() || m >= iv.hi() {
            // Adjacent floats; nothing left to split.
            return Err(SubdivideError);
        }
        let mut a = *self;
        let mut b = *self;
        a.dims[axis] = Interval::new(iv.lo(), m);
        b.dims[axis] = Interval::new(m, iv.hi());
        Ok((a, b))
    }
}

impl Deref for IntervalBox {
    type Target = [Interval];
    fn deref(&self) -> &[Interval] {
        &self.dims[..self.dim]
    }
}

impl DerefMut for IntervalBox {
    fn deref_mut(&mut self) -> &mut [Interval] {
        &mut self.dims[..self.dim]
    }
}

impl fmt::Debug for IntervalBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, iv) in self.iter().enumerate() {
            if i > 0 {
                write!(f, "×")?;
            }
            write!(f, "{iv}")?;
        }
        Ok(())
    }
}
