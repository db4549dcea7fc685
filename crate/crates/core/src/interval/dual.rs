//! Forward-mode differentiation over intervals.

use std::ops::{Add, Div, Mul, Neg, Sub};

use super::{Interval, IntervalBox, MAX_DIM};

/// An interval value together with interval enclosures of its partial
/// derivatives. Constants carry `dim == 0` and zero partials.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualInterval {
    pub value: Interval,
    grad: [Interval; MAX_DIM],
    dim: usize,
}

impl DualInterval {
    pub fn constant(value: Interval) -> DualInterval {
        DualInterval { value, grad: [Interval::ZERO; MAX_DIM], dim: 0 }
    }

    pub fn new(value: Interval, partials: &[Interval]) -> DualInterval {
        let mut grad = [Interval::ZERO; MAX_DIM];
        grad[..partials.len()].copy_from_slice(partials);
        DualInterval { value, grad, dim: partials.len() }
    }

    /// Seeds one dual per coordinate: `value = b[i]`, partials = e_i.
    pub fn lift(b: &IntervalBox) -> Vec<DualInterval> {
        (0..b.dim()).map(|i| Self::seed(b, i)).collect()
    }

    pub(crate) fn seed(b: &IntervalBox, i: usize) -> DualInterval {
        let mut grad = [Interval::ZERO; MAX_DIM];
        grad[i] = Interval::ONE;
        DualInterval { value: b[i], grad, dim: b.dim() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn partials(&self) -> &[Interval] {
        &self.grad[..self.dim]
    }

    /// Dot product of the partials with `v`.
    pub fn directional(&self, v: &[f64]) -> Interval {
        self.partials()
            .iter()
            .zip(v)
            .fold(Interval::ZERO, |acc, (g, &c)| acc + *g * Interval::point(c))
    }

    /// Enclosure of the Euclidean norm of the gradient.
    pub fn grad_norm(&self) -> Interval {
        self.partials()
            .iter()
            .fold(Interval::ZERO, |acc, g| acc + g.sqr())
            .sqrt()
    }

    #[inline]
    fn map(self, value: Interval, factor: Interval) -> DualInterval {
        let mut grad = self.grad;
        for g in grad.iter_mut().take(self.dim) {
            *g = *g * factor;
        }
        DualInterval { value, grad, dim: self.dim }
    }

    #[inline]
    fn zip(
        self,
        o: DualInterval,
        value: Interval,
        f: impl Fn(Interval, Interval) -> Interval,
    ) -> DualInterval {
        let dim = self.dim.max(o.dim);
        let mut grad = [Interval::ZERO; MAX_DIM];
        for (i, g) in grad.iter_mut().enumerate().take(dim) {
            *g = f(self.grad[i], o.grad[i]);
        }
        DualInterval { value, grad, dim }
    }

    pub fn sqr(self) -> DualInterval {
        let two_u = Interval::point(2.0) * self.value;
        self.map(self.value.sqr(), two_u)
    }

    pub fn powi(self, n: i32) -> DualInterval {
        match n {
            0 => DualInterval::constant(Interval::ONE),
            1 => self,
            2 => self.sqr(),
            _ => {
                let d = Interval::point(n as f64) * self.value.powi(n - 1);
                self.map(self.value.powi(n), d)
            }
        }
    }

    pub fn exp(self) -> DualInterval {
        let e = self.value.exp();
        self.map(e, e)
    }

    pub fn ln(self) -> DualInterval {
        let r = Interval::ONE.div_extended(self.value);
        self.map(self.value.ln(), r)
    }

    pub fn sqrt(self) -> DualInterval {
        let s = self.value.sqrt();
        let d = Interval::ONE.div_extended(Interval::point(2.0) * s);
        self.map(s, d)
    }

    /// `|u|`; when `u` straddles zero the partials become the hull of both
    /// one-sided derivatives.
    pub fn abs(self) -> DualInterval {
        if self.value.lo() >= 0.0 {
            self
        } else if self.value.hi() <= 0.0 {
            -self
        } else {
            let mut out = self;
            out.value = self.value.abs();
            for g in out.grad.iter_mut().take(self.dim) {
                let m = g.mag();
                *g = Interval::new(-m, m);
            }
            out
        }
    }

    pub fn min(self, o: DualInterval) -> DualInterval {
        if self.value.hi() < o.value.lo() {
            self
        } else if o.value.hi() < self.value.lo() {
            o
        } else {
            self.zip(o, self.value.min(o.value), |a, b| a.hull(&b))
        }
    }

    pub fn max(self, o: DualInterval) -> DualInterval {
        if self.value.lo() > o.value.hi() {
            self
        } else if o.value.lo() > self.value.hi() {
            o
        } else {
            self.zip(o, self.value.max(o.value), |a, b| a.hull(&b))
        }
    }
}

impl Add for DualInterval {
    type Output = DualInterval;
    #[inline]
    fn add(self, o: DualInterval) -> DualInterval {
        self.zip(o, self.value + o.value, |a, b| a + b)
    }
}

impl Sub for DualInterval {
    type Output = DualInterval;
    #[inline]
    fn sub(self, o: DualInterval) -> DualInterval {
        self.zip(o, self.value - o.value, |a, b| a - b)
    }
}

impl Neg for DualInterval {
    type Output = DualInterval;
    #[inline]
    fn neg(self) -> DualInterval {
        self.map(-self.value, Interval::point(-1.0))
    }
}

impl Mul for DualInterval {
    type Output = DualInterval;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, o: DualInterval) -> DualInterval {
        let (u, v) = (self.value, o.value);
        self.zip(o, u * v, |a, b| a * v + u * b)
    }
}

impl Div for DualInterval {
    type Output = DualInterval;
    #[inline]
    fn div(self, o: DualInterval) -> DualInterval {
        let q = self.value.div_extended(o.value);
        let v = o.value;
        self.zip(o, q, |a, b| (a - q * b).div_extended(v))
    }
}
