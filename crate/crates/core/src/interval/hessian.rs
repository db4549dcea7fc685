//! Second-order forward differentiation over intervals.

use std::ops::{Add, Div, Mul, Neg, Sub};

use super::{DualInterval, Interval, IntervalBox, MAX_DIM};

type Vector = [Interval; MAX_DIM];
type Matrix = [[Interval; MAX_DIM]; MAX_DIM];

const ZV: Vector = [Interval::ZERO; MAX_DIM];
const ZM: Matrix = [ZV; MAX_DIM];

/// Value, gradient and Hessian enclosures over a box.
///
/// Where the expression is not twice differentiable inside the box (a kink
/// of `abs`, `min` or `max`) the Hessian becomes the whole line, so the
/// enclosure stays sound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HessianInterval {
    pub value: Interval,
    grad: Vector,
    hess: Matrix,
    dim: usize,
}

impl HessianInterval {
    pub fn constant(value: Interval) -> HessianInterval {
        HessianInterval { value, grad: ZV, hess: ZM, dim: 0 }
    }

    pub fn lift(b: &IntervalBox) -> Vec<HessianInterval> {
        (0..b.dim())
            .map(|i| {
                let mut grad = ZV;
                grad[i] = Interval::ONE;
                HessianInterval { value: b[i], grad, hess: ZM, dim: b.dim() }
            })
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn partials(&self) -> &[Interval] {
        &self.grad[..self.dim]
    }

    pub fn second(&self, i: usize, j: usize) -> Interval {
        self.hess[i][j]
    }

    /// First-order view of this value.
    pub fn to_dual(&self) -> DualInterval {
        DualInterval::new(self.value, self.partials())
    }

    /// Partial `i` of the gradient as a dual number whose partials are row
    /// `i` of the Hessian.
    pub fn gradient_dual(&self, i: usize) -> DualInterval {
        DualInterval::new(self.grad[i], &self.hess[i][..self.dim])
    }

    /// Chain rule for a scalar function with value `v`, first derivative
    /// `d1` and second derivative `d2` at `self.value`.
    fn chain(self, v: Interval, d1: Interval, d2: Interval) -> HessianInterval {
        let n = self.dim;
        let mut out = HessianInterval { value: v, grad: ZV, hess: ZM, dim: n };
        for i in 0..n {
            out.grad[i] = d1 * self.grad[i];
            for j in 0..=i {
                let h = d1 * self.hess[i][j] + d2 * self.grad[i] * self.grad[j];
                out.hess[i][j] = h;
                out.hess[j][i] = h;
            }
        }
        out
    }

    fn kinked(mut self, v: Interval, grad: Vector) -> HessianInterval {
        self.value = v;
        self.grad = grad;
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.hess[i][j] = Interval::ENTIRE;
            }
        }
        self
    }

    pub fn sqr(self) -> HessianInterval {
        let two = Interval::point(2.0);
        self.chain(self.value.sqr(), two * self.value, two)
    }

    pub fn powi(self, n: i32) -> HessianInterval {
        match n {
            0 => HessianInterval::constant(Interval::ONE),
            1 => self,
            2 => self.sqr(),
            _ => {
                let nf = Interval::point(n as f64);
                let d1 = nf * self.value.powi(n - 1);
                let d2 = nf * Interval::point((n - 1) as f64) * self.value.powi(n - 2);
                self.chain(self.value.powi(n), d1, d2)
            }
        }
    }

    pub fn exp(self) -> HessianInterval {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> HessianInterval {
        let r = Interval::ONE.div_extended(self.value);
        self.chain(self.value.ln(), r, -r.sqr())
    }

    pub fn sqrt(self) -> HessianInterval {
        let s = self.value.sqrt();
        let d1 = Interval::ONE.div_extended(Interval::point(2.0) * s);
        let d2 = -Interval::ONE.div_extended(Interval::point(4.0) * s * self.value);
        self.chain(s, d1, d2)
    }

    pub fn recip(self) -> HessianInterval {
        let r = Interval::ONE.div_extended(self.value);
        self.chain(r, -r.sqr(), Interval::point(2.0) * r.sqr() * r)
    }

    pub fn abs(self) -> HessianInterval {
        if self.value.lo() >= 0.0 {
            self
        } else if self.value.hi() <= 0.0 {
            -self
        } else {
            let mut grad = self.grad;
            for g in grad.iter_mut().take(self.dim) {
                let m = g.mag();
                *g = Interval::new(-m, m);
            }
            self.kinked(self.value.abs(), grad)
        }
    }

    pub fn min(self, o: HessianInterval) -> HessianInterval {
        if self.value.hi() < o.value.lo() {
            self
        } else if o.value.hi() < self.value.lo() {
            o
        } else {
            self.merge(o, self.value.min(o.value))
        }
    }

    pub fn max(self, o: HessianInterval) -> HessianInterval {
        if self.value.lo() > o.value.hi() {
            self
        } else if o.value.lo() > self.value.hi() {
            o
        } else {
            self.merge(o, self.value.max(o.value))
        }
    }

    fn merge(self, o: HessianInterval, v: Interval) -> HessianInterval {
        let dim = self.dim.max(o.dim);
        let mut grad = ZV;
        for (i, g) in grad.iter_mut().enumerate().take(dim) {
            *g = self.grad[i].hull(&o.grad[i]);
        }
        HessianInterval { dim, ..self }.kinked(v, grad)
    }
}

impl Add for HessianInterval {
    type Output = HessianInterval;
    fn add(self, o: HessianInterval) -> HessianInterval {
        let dim = self.dim.max(o.dim);
        let mut out = HessianInterval { value: self.value + o.value, grad: ZV, hess: ZM, dim };
        for i in 0..dim {
            out.grad[i] = self.grad[i] + o.grad[i];
            for j in 0..dim {
                out.hess[i][j] = self.hess[i][j] + o.hess[i][j];
            }
        }
        out
    }
}

impl Neg for HessianInterval {
    type Output = HessianInterval;
    fn neg(mut self) -> HessianInterval {
        self.value = -self.value;
        for i in 0..self.dim {
            self.grad[i] = -self.grad[i];
            for j in 0..self.dim {
                self.hess[i][j] = -self.hess[i][j];
            }
        }
        self
    }
}

impl Sub for HessianInterval {
    type Output = HessianInterval;
    fn sub(self, o: HessianInterval) -> HessianInterval {
        self + (-o)
    }
}

impl Mul for HessianInterval {
    type Output = HessianInterval;
    fn mul(self, o: HessianInterval) -> HessianInterval {
        let dim = self.dim.max(o.dim);
        let (u, v) = (self.value, o.value);
        let mut out = HessianInterval { value: u * v, grad: ZV, hess: ZM, dim };
        for i in 0..dim {
            out.grad[i] = u * o.grad[i] + v * self.grad[i];
            for j in 0..=i {
                let h = u * o.hess[i][j]
                    + v * self.hess[i][j]
                    + self.grad[i] * o.grad[j]
                    + self.grad[j] * o.grad[i];
                out.hess[i][j] = h;
                out.hess[j][i] = h;
            }
        }
        out
    }
}

impl Div for HessianInterval {
    type Output = HessianInterval;
    fn div(self, o: HessianInterval) -> HessianInterval {
        if o.dim == 0 {
            let r = Interval::ONE.div_extended(o.value);
            return self.chain(self.value / o.value, r, Interval::ZERO);
        }
        let mut q = self * o.recip();
        q.value = self.value / o.value;
        q
    }
}
