use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::interval::{DualInterval, HessianInterval, Interval};

/// Number types an expression tree can be evaluated over: plain floats,
/// intervals (inclusion functions) and dual intervals (gradient enclosures).
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(c: f64) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn sqr(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn min(self, o: Self) -> Self;
    fn max(self, o: Self) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn cst(c: f64) -> f64 {
        c
    }
    #[inline]
    fn exp(self) -> f64 {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> f64 {
        f64::ln(self)
    }
    #[inline]
    fn sqrt(self) -> f64 {
        f64::sqrt(self)
    }
    #[inline]
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    #[inline]
    fn sqr(self) -> f64 {
        self * self
    }
    #[inline]
    fn powi(self, n: i32) -> f64 {
        f64::powi(self, n)
    }
    #[inline]
    fn min(self, o: f64) -> f64 {
        f64::min(self, o)
    }
    #[inline]
    fn max(self, o: f64) -> f64 {
        f64::max(self, o)
    }
}

impl Scalar for Interval {
    #[inline]
    fn cst(c: f64) -> Interval {
        Interval::point(c)
    }
    #[inline]
    fn exp(self) -> Interval {
        Interval::exp(self)
    }
    #[inline]
    fn ln(self) -> Interval {
        Interval::ln(self)
    }
    #[inline]
    fn sqrt(self) -> Interval {
        Interval::sqrt(self)
    }
    #[inline]
    fn abs(self) -> Interval {
        Interval::abs(self)
    }
    #[inline]
    fn sqr(self) -> Interval {
        Interval::sqr(self)
    }
    #[inline]
    fn powi(self, n: i32) -> Interval {
        Interval::powi(self, n)
    }
    #[inline]
    fn min(self, o: Interval) -> Interval {
        Interval::min(self, o)
    }
    #[inline]
    fn max(self, o: Interval) -> Interval {
        Interval::max(self, o)
    }
}

impl Scalar for DualInterval {
    #[inline]
    fn cst(c: f64) -> DualInterval {
        DualInterval::constant(Interval::point(c))
    }
    #[inline]
    fn exp(self) -> DualInterval {
        DualInterval::exp(self)
    }
    #[inline]
    fn ln(self) -> DualInterval {
        DualInterval::ln(self)
    }
    #[inline]
    fn sqrt(self) -> DualInterval {
        DualInterval::sqrt(self)
    }
    #[inline]
    fn abs(self) -> DualInterval {
        DualInterval::abs(self)
    }
    #[inline]
    fn sqr(self) -> DualInterval {
        DualInterval::sqr(self)
    }
    #[inline]
    fn powi(self, n: i32) -> DualInterval {
        DualInterval::powi(self, n)
    }
    #[inline]
    fn min(self, o: DualInterval) -> DualInterval {
        DualInterval::min(self, o)
    }
    #[inline]
    fn max(self, o: DualInterval) -> DualInterval {
        DualInterval::max(self, o)
    }
}

impl Scalar for HessianInterval {
    #[inline]
    fn cst(c: f64) -> HessianInterval {
        HessianInterval::constant(Interval::point(c))
    }
    #[inline]
    fn exp(self) -> HessianInterval {
        HessianInterval::exp(self)
    }
    #[inline]
    fn ln(self) -> HessianInterval {
        HessianInterval::ln(self)
    }
    #[inline]
    fn sqrt(self) -> HessianInterval {
        HessianInterval::sqrt(self)
    }
    #[inline]
    fn abs(self) -> HessianInterval {
        HessianInterval::abs(self)
    }
    #[inline]
    fn sqr(self) -> HessianInterval {
        HessianInterval::sqr(self)
    }
    #[inline]
    fn powi(self, n: i32) -> HessianInterval {
        HessianInterval::powi(self, n)
    }
    #[inline]
    fn min(self, o: HessianInterval) -> HessianInterval {
        HessianInterval::min(self, o)
    }
    #[inline]
    fn max(self, o: HessianInterval) -> HessianInterval {
        HessianInterval::max(self, o)
    }
}
