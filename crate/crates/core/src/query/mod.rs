//! The walk-on-stars geometric queries, each posed as an interval
//! minimization or constraint-satisfaction problem.

mod cpq;
mod gamma;
mod ray;
mod robin;
mod silhouette;
mod star;

pub use cpq::{cpq, cpq_traced, CpqResult};
pub use gamma::{sample_gamma, sample_gamma_traced, GammaResult, GammaSample};
pub use ray::{ray_intersect, ray_intersect_traced, RayHit, RayResult};
pub use robin::{robin_objective, robin_objective_at, robin_objective_box, rrbq, rrbq_traced, RobinRadiusResult};
pub use silhouette::{cspq, cspq_traced, psi_interval, SilhouetteResult};
pub use star::{star_radius, star_radius_traced, StarFlags, StarRegion};

use crate::interval::{Interval, IntervalBox};
use crate::opt::{Stats, TraceEvent, DEFAULT_BUDGET};
use crate::scene::Scene;

/// Tolerances and limits shared by all queries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QueryConfig {
    /// Box acceptance width and surface tolerance.
    pub tol: f64,
    /// Explored-box cap per branch-and-bound run.
    pub budget: usize,
    /// Relative shrink applied to the silhouette radius.
    pub shrink: f64,
    /// Certification boxes go down to `tol / 2^cert_depth`.
    pub cert_depth: u32,
    /// Halving rounds when certification fails.
    pub cert_rounds: u32,
    /// Acceptance width of the SOLVE pass behind reflecting-boundary sampling.
    pub gamma_tol: f64,
    /// When the Robin objective exceeds the silhouette radius, search for a
    /// boundary point with a finite objective to tell an unbounded
    /// objective apart from a large one. Walks only need the radius and
    /// switch this off.
    pub classify_unbounded: bool,
}

impl QueryConfig {
    pub fn new(tol: f64) -> QueryConfig {
        QueryConfig { tol, budget: DEFAULT_BUDGET, shrink: 1e-3, cert_depth: 6, cert_rounds: 8, gamma_tol: tol, classify_unbounded: true }
    }

    /// Tolerance of one tenth of the scene's epsilon-shell.
    /// In 3D the sampling pass uses boxes 100 times wider, since the number
    /// of boxes covering a surface grows with the inverse square of the width.
    pub fn for_scene(scene: &Scene) -> QueryConfig {
        let mut c = QueryConfig::new(scene.tolerance());
        if scene.dim == 3 {
            c.gamma_tol = 100.0 * c.tol;
        }
        c
    }

    pub fn with_tol(mut self, tol: f64) -> QueryConfig {
        self.tol = tol;
        self.gamma_tol = tol;
        self
    }
}

/// Receives every box event of a branch-and-bound run.
pub type TraceSink<'a> = dyn FnMut(TraceEvent, &IntervalBox) + 'a;

/// Optional sink for box events plus running totals.
#[derive(Default)]
pub struct Tracer<'a> {
    sink: Option<&'a mut TraceSink<'a>>,
}

impl<'a> Tracer<'a> {
    pub fn none() -> Tracer<'a> {
        Tracer { sink: None }
    }

    pub fn new(sink: &'a mut TraceSink<'a>) -> Tracer<'a> {
        Tracer { sink: Some(sink) }
    }

    pub(crate) fn emit(&mut self, e: TraceEvent, b: &IntervalBox) {
        if let Some(s) = self.sink.as_mut() {
            s(e, b);
        }
    }
}

pub(crate) fn add_stats(a: &mut Stats, b: &Stats) {
    a.boxes_explored += b.boxes_explored;
    a.boxes_pruned_constraint += b.boxes_pruned_constraint;
    a.boxes_pruned_bound += b.boxes_pruned_bound;
    a.boxes_accepted += b.boxes_accepted;
}

/// Enclosure of `‖z − x‖²` over a box; exact up to rounding since each
/// coordinate occurs once.
pub fn dist2(b: &IntervalBox, x: &[f64]) -> Interval {
    b.iter()
        .zip(x)
        .fold(Interval::ZERO, |acc, (iv, &c)| acc + (*iv - Interval::point(c)).sqr())
}
