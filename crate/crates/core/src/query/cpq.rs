use super::{add_stats, dist2, QueryConfig, Tracer};
use crate::field::ImplicitField;
use crate::interval::{Interval, IntervalBox, Point};
use crate::opt::{eq_zero, minimize_traced, Acceptance, Options, Problem, Stats};
use crate::surface::project_to_surface;

#[derive(Clone, Debug)]
pub struct CpqResult {
    /// Closest surface point; `None` when the surface is absent.
    pub closest: Option<Point>,
    /// Enclosure of the distance; `[+inf, +inf]` when absent.
    pub r_d: Interval,
    pub absent: bool,
    pub stats: Stats,
    pub converged: bool,
}

/// Closest point on the zero set of `f` to `x` within `search`.
///
/// `upper` is a distance known to be attained by some surface point (for
/// example the distance to a previous closest point); it shrinks the search
/// box and seeds the pruning bound.
pub fn cpq(f: &ImplicitField, x: &[f64], search: &IntervalBox, upper: Option<f64>, cfg: &QueryConfig) -> CpqResult {
    cpq_traced(f, x, search, upper, cfg, &mut Tracer::none())
}

pub fn cpq_traced(
    f: &ImplicitField,
    x: &[f64],
    search: &IntervalBox,
    upper: Option<f64>,
    cfg: &QueryConfig,
    tr: &mut Tracer,
) -> CpqResult {
    let mut stats = Stats::default();
    if let Some(u) = upper.filter(|u| u.is_finite()) {
        let u = u * (1.0 + 1e-12) + cfg.tol;
        let boxed = search.intersect(&IntervalBox::cube(x, u));
        if !boxed.is_empty() {
            let r = run(f, x, &boxed, u * u, cfg, tr);
            add_stats(&mut stats, &r.stats);
            if !r.absent {
                return CpqResult { stats, ..r };
            }
        }
    }
    let r = run(f, x, search, f64::INFINITY, cfg, tr);
    add_stats(&mut stats, &r.stats);
    CpqResult { stats, ..r }
}

fn run(f: &ImplicitField, x: &[f64], search: &IntervalBox, ub: f64, cfg: &QueryConfig, tr: &mut Tracer) -> CpqResult {
    let obj = |b: &IntervalBox| dist2(b, x);
    let con = |b: &IntervalBox| eq_zero(f.eval_interval(b));
    let problem = Problem { objective: &obj, constraint: &con, incumbent: None };
    let opts = Options { budget: cfg.budget, first_solution: true, initial_upper: ub, ..Options::default() };
    let r = minimize_traced(&problem, Acceptance::new(cfg.tol), search, &opts, &mut |e, b| tr.emit(e, b));
    if let Some(lo) = r.exhausted_lower {
        // Out of budget: the queue minimum still bounds the distance from
        // below, and a projection of `x` gives an attained upper bound.
        let lo = Interval::point(lo.max(0.0)).sqrt().lo();
        let closest = project_to_surface(f, &Point::new(x), 2.0 * lo + cfg.tol, 1e-13);
        let hi = closest.map_or(f64::INFINITY, |c| c.distance(x).max(lo));
        return CpqResult { closest, r_d: Interval::new(lo, hi), absent: false, stats: r.stats, converged: false };
    }
    if !r.feasible {
        return CpqResult {
            closest: None,
            r_d: Interval::new(f64::INFINITY, f64::INFINITY),
            absent: true,
            stats: r.stats,
            converged: r.converged,
        };
    }
    let rep = r.representative_point.unwrap();
    let width = r.accepted_boxes[0].width();
    let closest = project_to_surface(f, &rep, (4.0 * width).max(cfg.tol), 1e-13).unwrap_or(rep);
    let lo = r.minimum_bound.sqrt().lo();
    let xp = Point::new(x);
    let hi = xp.distance(&closest).max(lo);
    CpqResult { closest: Some(closest), r_d: Interval::new(lo, hi), absent: false, stats: r.stats, converged: r.converged }
}
