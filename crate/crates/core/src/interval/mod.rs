//! Interval arithmetic with outward rounding.
//!
//! Endpoints may be infinite. The empty interval is a distinct value (both
//! endpoints NaN) and every operation propagates it.

mod boxes;
mod dual;
mod hessian;
mod round;

pub use boxes::{IntervalBox, Point, SubdivideError, MAX_DIM};
pub use dual::DualInterval;
pub use hessian::HessianInterval;

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use round::*;

/// Closed real interval `[lo, hi]` over the extended reals.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

/// Verdict of a constraint inclusion function over a box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ThreeValued {
    /// The constraint holds at every point of the box.
    Positive,
    /// The constraint fails at every point of the box.
    Negative,
    Unknown,
}

impl ThreeValued {
    pub fn and(self, other: ThreeValued) -> ThreeValued {
        use ThreeValued::*;
        match (self, other) {
            (Negative, _) | (_, Negative) => Negative,
            (Positive, Positive) => Positive,
            _ => Unknown,
        }
    }
}

impl Interval {
    pub const EMPTY: Interval = Interval { lo: f64::NAN, hi: f64::NAN };
    pub const ENTIRE: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };

    /// Builds `[lo, hi]`. Panics if `lo > hi` or either endpoint is NaN.
    pub fn new(lo: f64, hi: f64) -> Interval {
        assert!(lo <= hi, "invalid interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    /// Like [`Interval::new`] but returns `None` for inverted or NaN endpoints.
    pub fn try_new(lo: f64, hi: f64) -> Option<Interval> {
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn point(x: f64) -> Interval {
        if x.is_nan() {
            return Interval::EMPTY;
        }
        Interval { lo: x, hi: x }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.lo.is_nan()
    }

    pub fn width(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        if self.lo == f64::NEG_INFINITY && self.hi == f64::INFINITY {
            return 0.0;
        }
        if self.lo == f64::NEG_INFINITY {
            return f64::MIN;
        }
        if self.hi == f64::INFINITY {
            return f64::MAX;
        }
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        !self.is_empty() && self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    /// `self ⊆ other`. The empty interval is a subset of everything.
    pub fn subset_of(&self, other: &Interval) -> bool {
        self.is_empty() || (!other.is_empty() && other.lo <= self.lo && self.hi <= other.hi)
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        if self.is_empty() {
            return *other;
        }
        if other.is_empty() {
            return *self;
        }
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        if self.is_empty() || other.is_empty() {
            return Interval::EMPTY;
        }
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo > hi {
            Interval::EMPTY
        } else {
            Interval { lo, hi }
        }
    }

    /// Largest absolute value in the interval.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Smallest absolute value in the interval.
    pub fn mig(&self) -> f64 {
        if self.contains_zero() {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn sqr(self) -> Interval {
        if self.is_empty() {
            return self;
        }
        if self.lo >= 0.0 {
            Interval { lo: mul_down(self.lo, self.lo), hi: mul_up(self.hi, self.hi) }
        } else if self.hi <= 0.0 {
            Interval { lo: mul_down(self.hi, self.hi), hi: mul_up(self.lo, self.lo) }
        } else {
            let m = self.mag();
            Interval { lo: 0.0, hi: mul_up(m, m) }
        }
    }

    /// Integer power, tight on both monotone branches.
    pub fn powi(self, n: i32) -> Interval {
        if self.is_empty() {
            return self;
        }
        match n {
            0 => Interval::ONE,
            1 => self,
            2 => self.sqr(),
            n if n < 0 => Interval::ONE.div_extended(self.powi(-n)),
            n if n % 2 == 0 => self.powi(n / 2).sqr(),
            n => {
                // Odd powers are monotone.
                let up = |x: f64| {
                    if x >= 0.0 {
                        pow_nonneg(x, n, mul_up)
                    } else {
                        -pow_nonneg(-x, n, mul_down)
                    }
                };
                let down = |x: f64| {
                    if x >= 0.0 {
                        pow_nonneg(x, n, mul_down)
                    } else {
                        -pow_nonneg(-x, n, mul_up)
                    }
                };
                Interval { lo: down(self.lo), hi: up(self.hi) }
            }
        }
    }

    pub fn exp(self) -> Interval {
        if self.is_empty() {
            return self;
        }
        Interval { lo: exp_down(self.lo), hi: exp_up(self.hi) }
    }

    /// Natural log; the part of the argument below zero is discarded.
    pub fn ln(self) -> Interval {
        if self.is_empty() || self.hi < 0.0 {
            return Interval::EMPTY;
        }
        Interval { lo: ln_down(self.lo.max(0.0)), hi: ln_up(self.hi) }
    }

    /// Square root over the non-negative part of the argument. Fully negative
    /// input yields the empty interval.
    pub fn sqrt(self) -> Interval {
        self.sqrt_flagged().0
    }

    /// Square root that also reports whether a negative part was discarded.
    pub fn sqrt_flagged(self) -> (Interval, bool) {
        if self.is_empty() {
            return (self, false);
        }
        if self.hi < 0.0 {
            return (Interval::EMPTY, true);
        }
        let clipped = self.lo < 0.0;
        (Interval { lo: sqrt_down(self.lo.max(0.0)), hi: sqrt_up(self.hi) }, clipped)
    }

    pub fn abs(self) -> Interval {
        if self.is_empty() || self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            -self
        } else {
            Interval { lo: 0.0, hi: self.mag() }
        }
    }

    /// Intersection with `[0, +inf)`.
    pub fn clamp_nonneg(self) -> Interval {
        self.intersect(&Interval { lo: 0.0, hi: f64::INFINITY })
    }

    pub fn min(self, other: Interval) -> Interval {
        if self.is_empty() || other.is_empty() {
            return Interval::EMPTY;
        }
        Interval { lo: self.lo.min(other.lo), hi: self.hi.min(other.hi) }
    }

    pub fn max(self, other: Interval) -> Interval {
        if self.is_empty() || other.is_empty() {
            return Interval::EMPTY;
        }
        Interval { lo: self.lo.max(other.lo), hi: self.hi.max(other.hi) }
    }

    /// Division with `x / 0 = +inf` for positive numerators.
    ///
    /// A divisor containing zero produces a half-unbounded result; `0/0`
    /// situations (numerator and divisor both containing zero) produce the
    /// whole extended line.
    pub fn div_extended(self, d: Interval) -> Interval {
        let n = self;
        if n.is_empty() || d.is_empty() {
            return Interval::EMPTY;
        }
        if d.lo > 0.0 || d.hi < 0.0 {
            let ((a, b), (c, e)) = if d.lo > 0.0 {
                if n.lo >= 0.0 {
                    ((n.lo, d.hi), (n.hi, d.lo))
                } else if n.hi <= 0.0 {
                    ((n.lo, d.lo), (n.hi, d.hi))
                } else {
                    ((n.lo, d.lo), (n.hi, d.lo))
                }
            } else if n.lo >= 0.0 {
                ((n.hi, d.hi), (n.lo, d.lo))
            } else if n.hi <= 0.0 {
                ((n.hi, d.lo), (n.lo, d.hi))
            } else {
                ((n.hi, d.hi), (n.lo, d.hi))
            };
            return Interval { lo: quot_down(a, b), hi: quot_up(c, e) };
        }
        if n.contains_zero() {
            return Interval::ENTIRE;
        }
        if d.lo == 0.0 && d.hi == 0.0 {
            return if n.lo > 0.0 {
                Interval { lo: f64::INFINITY, hi: f64::INFINITY }
            } else {
                Interval { lo: f64::NEG_INFINITY, hi: f64::NEG_INFINITY }
            };
        }
        if d.lo == 0.0 {
            // d = [0, d.hi], d.hi > 0
            if n.lo > 0.0 {
                Interval { lo: div_down(n.lo, d.hi), hi: f64::INFINITY }
            } else {
                Interval { lo: f64::NEG_INFINITY, hi: div_up(n.hi, d.hi) }
            }
        } else if d.hi == 0.0 {
            // d = [d.lo, 0], d.lo < 0
            if n.lo > 0.0 {
                Interval { lo: f64::NEG_INFINITY, hi: div_up(n.lo, d.lo) }
            } else {
                Interval { lo: div_down(n.hi, d.lo), hi: f64::INFINITY }
            }
        } else {
            Interval::ENTIRE
        }
    }

    /// Enclosure of `{‖z − center‖ : z ∈ b}`.
    pub fn norm_from(b: &IntervalBox, center: &[f64]) -> Interval {
        let mut acc = Interval::ZERO;
        for (iv, &c) in b.iter().zip(center) {
            acc = acc + (*iv - Interval::point(c)).sqr();
        }
        acc.sqrt()
    }
}

/// Rounded-down quotient for a nonzero divisor, allowing infinite operands.
fn quot_down(a: f64, b: f64) -> f64 {
    if b.is_infinite() {
        return match (a.is_infinite(), a.signum() * b.signum() > 0.0) {
            (true, true) => 0.0,
            (true, false) => f64::NEG_INFINITY,
            (false, _) => 0.0,
        };
    }
    div_down(a, b)
}

fn quot_up(a: f64, b: f64) -> f64 {
    if b.is_infinite() {
        return match (a.is_infinite(), a.signum() * b.signum() > 0.0) {
            (true, true) => f64::INFINITY,
            (true, false) => 0.0,
            (false, _) => 0.0,
        };
    }
    div_up(a, b)
}

fn pow_nonneg(x: f64, n: i32, mul: fn(f64, f64) -> f64) -> f64 {
    let mut acc = x;
    for _ in 1..n {
        acc = mul(acc, x);
    }
    acc
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "[empty]")
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Interval {
        Interval::point(x)
    }
}

impl Add for Interval {
    type Output = Interval;
    #[inline]
    fn add(self, o: Interval) -> Interval {
        if self.is_empty() || o.is_empty() {
            return Interval::EMPTY;
        }
        let lo = add_down(self.lo, o.lo);
        let hi = add_up(self.hi, o.hi);
        // -inf + inf at an endpoint
        Interval { lo: if lo.is_nan() { f64::NEG_INFINITY } else { lo }, hi: if hi.is_nan() { f64::INFINITY } else { hi } }
    }
}

impl Sub for Interval {
    type Output = Interval;
    #[inline]
    fn sub(self, o: Interval) -> Interval {
        if self.is_empty() || o.is_empty() {
            return Interval::EMPTY;
        }
        let lo = sub_down(self.lo, o.hi);
        let hi = sub_up(self.hi, o.lo);
        Interval { lo: if lo.is_nan() { f64::NEG_INFINITY } else { lo }, hi: if hi.is_nan() { f64::INFINITY } else { hi } }
    }
}

impl Neg for Interval {
    type Output = Interval;
    #[inline]
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Mul for Interval {
    type Output = Interval;
    #[inline]
    fn mul(self, o: Interval) -> Interval {
        if self.is_empty() || o.is_empty() {
            return Interval::EMPTY;
        }
        let (a, b, c, d) = (self.lo, self.hi, o.lo, o.hi);
        let (lo, hi) = if a >= 0.0 {
            if c >= 0.0 {
                (mul_down(a, c), mul_up(b, d))
            } else if d <= 0.0 {
                (mul_down(b, c), mul_up(a, d))
            } else {
                (mul_down(b, c), mul_up(b, d))
            }
        } else if b <= 0.0 {
            if c >= 0.0 {
                (mul_down(a, d), mul_up(b, c))
            } else if d <= 0.0 {
                (mul_down(b, d), mul_up(a, c))
            } else {
                (mul_down(a, d), mul_up(a, c))
            }
        } else if c >= 0.0 {
            (mul_down(a, d), mul_up(b, d))
        } else if d <= 0.0 {
            (mul_down(b, c), mul_up(a, c))
        } else {
            (mul_down(a, d).min(mul_down(b, c)), mul_up(a, c).max(mul_up(b, d)))
        };
        Interval { lo, hi }
    }
}

impl Div for Interval {
    type Output = Interval;
    #[inline]
    fn div(self, o: Interval) -> Interval {
        self.div_extended(o)
    }
}
