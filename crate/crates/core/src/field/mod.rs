//! Implicit scalar fields: point, box-inclusion and box-gradient evaluation.

mod expr;
mod parse;
mod scalar;

pub use expr::{BinaryOp, Expr, Rbf, RbfKernel, UnaryOp};
pub use parse::{parse_expr, ExprError};
pub use scalar::Scalar;

use crate::interval::{DualInterval, HessianInterval, Interval, IntervalBox, Point, MAX_DIM};

/// A scalar field over R^d defined by an expression tree.
#[derive(Clone, Debug, PartialEq)]
pub struct ImplicitField {
    expr: Expr,
    dim: usize,
}

impl ImplicitField {
    /// Wraps an expression; panics if it references a coordinate beyond `dim`.
    pub fn new(expr: Expr, dim: usize) -> ImplicitField {
        assert!((1..=MAX_DIM).contains(&dim));
        if let Some(v) = expr.max_var() {
            assert!(v < dim, "expression uses coordinate {v} in a {dim}-d field");
        }
        ImplicitField { expr, dim }
    }

    pub fn constant(c: f64, dim: usize) -> ImplicitField {
        ImplicitField::new(Expr::Const(c), dim)
    }

    /// Parses an expression in the scene-file expression syntax.
    pub fn parse(text: &str, dim: usize) -> Result<ImplicitField, ExprError> {
        let expr = parse_expr(text, dim, &Default::default())?;
        Ok(ImplicitField::new(expr, dim))
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_constant(&self) -> Option<f64> {
        self.expr.as_constant()
    }

    /// Plain floating-point evaluation. Poles of harmonic kernels evaluate to
    /// an infinite value.
    pub fn eval_value(&self, p: &[f64]) -> f64 {
        self.expr.eval(&p[..self.dim])
    }

    /// Natural interval extension over `b`.
    pub fn eval_interval(&self, b: &IntervalBox) -> Interval {
        self.expr.eval(&b[..self.dim])
    }

    /// Value and gradient enclosures over `b`.
    pub fn eval_gradient(&self, b: &IntervalBox) -> DualInterval {
        let mut seeds = [DualInterval::constant(Interval::ZERO); MAX_DIM];
        for (i, s) in seeds.iter_mut().enumerate().take(self.dim) {
            *s = DualInterval::seed(b, i);
        }
        let mut out = self.expr.eval(&seeds[..self.dim]);
        if out.dim() < self.dim {
            // Constant-valued field: expose explicit zero partials.
            out = DualInterval::new(out.value, &[Interval::ZERO; MAX_DIM][..self.dim]);
        }
        out
    }

    /// Value, gradient and Hessian enclosures over `b`.
    pub fn eval_hessian(&self, b: &IntervalBox) -> HessianInterval {
        let seeds = HessianInterval::lift(&IntervalBox::new(&b[..self.dim]));
        let out = self.expr.eval(&seeds);
        if out.dim() < self.dim {
            return seeds[0] * HessianInterval::constant(Interval::ZERO) + out;
        }
        out
    }

    /// Value and gradient at a point.
    pub fn value_and_gradient(&self, p: &[f64]) -> (f64, Point) {
        let d = self.eval_gradient(&IntervalBox::from_point(&p[..self.dim]));
        let mut g = Point::zeros(self.dim);
        for (gi, pi) in g.iter_mut().zip(d.partials()) {
            *gi = pi.mid();
        }
        (self.eval_value(p), g)
    }

    pub fn gradient(&self, p: &[f64]) -> Point {
        self.value_and_gradient(p).1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_values() {
        let f = ImplicitField::parse("x^2 + y^2 - 1", 2).unwrap();
        assert_eq!(f.eval_value(&[2.0, 0.0]), 3.0);
        let b = IntervalBox::from_bounds(&[(0.0, 1.0), (0.0, 1.0)]);
        assert_eq!(f.eval_interval(&b), Interval::new(-1.0, 1.0));
    }

    #[test]
    fn circle_gradient_at_point() {
        let f = ImplicitField::parse("circle(0, 0, 1)", 2).unwrap();
        let d = f.eval_gradient(&IntervalBox::from_point(&[1.0, 0.0]));
        assert_eq!(d.value, Interval::ZERO);
        assert_eq!(d.partials(), &[Interval::point(2.0), Interval::ZERO]);
    }

    #[test]
    fn sphere_gradient_over_cube() {
        let f = ImplicitField::parse("sphere(0, 0, 0, 1)", 3).unwrap();
        let d = f.eval_gradient(&IntervalBox::cube(&[0.0, 0.0, 0.0], 1.0));
        for p in d.partials() {
            assert_eq!(*p, Interval::new(-2.0, 2.0));
        }
    }

    #[test]
    fn union_takes_pointwise_min() {
        let f = ImplicitField::parse("min(circle(0,0,1), circle(3,0,1))", 2).unwrap();
        let p = [0.2, 0.1];
        let c1 = 0.2f64 * 0.2 + 0.1 * 0.1 - 1.0;
        assert_eq!(f.eval_value(&p), c1);
        assert!(f.eval_value(&p) < 0.0);
    }

    #[test]
    fn constant_field_has_zero_gradient() {
        let f = ImplicitField::constant(2.0, 3);
        let d = f.eval_gradient(&IntervalBox::cube(&[0.0; 3], 1.0));
        assert_eq!(d.partials().len(), 3);
        assert!(d.partials().iter().all(|p| *p == Interval::ZERO));
    }
}
