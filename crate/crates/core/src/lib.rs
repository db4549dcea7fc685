//! Interval branch-and-bound geometric queries on implicit surfaces and a
//! walk-on-stars Monte Carlo solver for Laplace problems with mixed
//! Dirichlet, Neumann and Robin boundaries.

// Negated comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod field;
pub mod interval;
pub mod opt;
pub mod oracle;
pub mod query;
pub mod scene;
pub mod surface;
pub mod wost;

pub use field::ImplicitField;
pub use interval::{DualInterval, Interval, IntervalBox, Point, ThreeValued};
pub use scene::{Boundary, RobinCoefficientField, Scene, SceneError, Side};
