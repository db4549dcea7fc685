//! Interval branch-and-bound: constrained global minimization and
//! constraint satisfaction over boxes.
//!
//! Both drivers take an objective inclusion (box → interval) and a
//! constraint inclusion (box → [`ThreeValued`]) as plain closures.

mod constraint;

pub use constraint::{ball, conj, eq_zero, halfspace_dot, nonnegative, nonpositive};

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::interval::{Interval, IntervalBox, Point, ThreeValued};

/// Default cap on explored boxes per call.
pub const DEFAULT_BUDGET: usize = 1_000_000;

/// A box is fine enough once its widest side is at most `tolerance`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Acceptance {
    pub tolerance: f64,
}

impl Acceptance {
    pub fn new(tolerance: f64) -> Acceptance {
        assert!(tolerance > 0.0, "tolerance must be positive");
        Acceptance { tolerance }
    }

    pub fn accepts(&self, b: &IntervalBox) -> bool {
        b.width() <= self.tolerance
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub boxes_explored: usize,
    pub boxes_pruned_constraint: usize,
    pub boxes_pruned_bound: usize,
    pub boxes_accepted: usize,
}

/// Box events reported to a trace sink; totals match [`Stats`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceEvent {
    Explored,
    PrunedConstraint,
    PrunedBound,
    Accepted,
}

impl TraceEvent {
    pub fn name(self) -> &'static str {
        match self {
            TraceEvent::Explored => "explored",
            TraceEvent::PrunedConstraint => "pruned_constraint",
            TraceEvent::PrunedBound => "pruned_bound",
            TraceEvent::Accepted => "accepted",
        }
    }
}

/// Early termination once the global lower bound is close to the best
/// feasible value found.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gap {
    None,
    /// Stop when `upper − lower ≤ δ`.
    Absolute(f64),
    /// For squared-distance objectives: stop when `√upper − √lower ≤ δ`.
    SqrtAbsolute(f64),
}

impl Gap {
    fn closed(self, lower: f64, upper: f64) -> bool {
        match self {
            Gap::None => false,
            Gap::Absolute(d) => upper - lower <= d,
            Gap::SqrtAbsolute(d) => upper.max(0.0).sqrt() - lower.max(0.0).sqrt() <= d,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Options {
    /// Maximum number of explored boxes.
    pub budget: usize,
    /// Stop minimization at the first accepted box.
    pub first_solution: bool,
    /// Before accepting a box whose constraint is unknown, split it this
    /// many more levels and reject it if every piece is infeasible.
    pub refine_levels: u32,
    /// A value known to be attained by some feasible point.
    pub initial_upper: f64,
    pub gap: Gap,
    /// Stop as soon as the global lower bound reaches this value.
    pub stop_at: f64,
}

impl Default for Options {
    fn default() -> Options {
        Options {
            budget: DEFAULT_BUDGET,
            first_solution: false,
            refine_levels: 0,
            initial_upper: f64::INFINITY,
            gap: Gap::None,
            stop_at: f64::INFINITY,
        }
    }
}

/// Local search from a box: a feasible point near it and its objective.
pub type IncumbentFn<'a> = dyn Fn(&IntervalBox) -> Option<(f64, Point)> + 'a;

/// Objective and constraint inclusions plus an optional incumbent search:
/// given a box, find a feasible point near it and return its objective value.
pub struct Problem<'a> {
    pub objective: &'a dyn Fn(&IntervalBox) -> Interval,
    pub constraint: &'a dyn Fn(&IntervalBox) -> ThreeValued,
    pub incumbent: Option<&'a IncumbentFn<'a>>,
}

#[derive(Clone, Debug)]
pub struct MinimizeResult {
    pub feasible: bool,
    /// `[global lower bound, upper bound over accepted boxes]`; empty when
    /// infeasible.
    pub minimum_bound: Interval,
    pub accepted_boxes: Vec<IntervalBox>,
    /// Midpoint of the accepted box with the smallest objective lower bound.
    pub representative_point: Option<Point>,
    /// Best feasible point supplied by the incumbent search.
    pub incumbent: Option<Point>,
    pub stats: Stats,
    pub converged: bool,
    /// The search stopped because the lower bound reached `stop_at`; the
    /// minimum, if any, is at least that lower bound.
    pub capped: Option<f64>,
    /// Global lower bound when the budget ran out before any box was
    /// accepted.
    pub exhausted_lower: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub accepted_boxes: Vec<IntervalBox>,
    pub stats: Stats,
    pub converged: bool,
}

struct Entry {
    lower: f64,
    seq: u64,
    b: IntervalBox,
}

impl PartialEq for Entry {
    fn eq(&self, o: &Entry) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Entry) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Entry {
    // Reversed so the max-heap pops the smallest bound, then the oldest.
    fn cmp(&self, o: &Entry) -> Ordering {
        o.lower.total_cmp(&self.lower).then_with(|| o.seq.cmp(&self.seq))
    }
}

/// Whether `b` survives a finer look: split `levels` more times and keep it if
/// any piece is not infeasible.
fn survives_refinement(b: &IntervalBox, con: &dyn Fn(&IntervalBox) -> ThreeValued, levels: u32) -> bool {
    if levels == 0 {
        return true;
    }
    let mut stack = vec![(*b, 0u32)];
    while let Some((y, depth)) = stack.pop() {
        if con(&y) == ThreeValued::Negative {
            continue;
        }
        if depth == levels {
            return true;
        }
        match y.subdivide() {
            Ok((l, r)) => {
                stack.push((r, depth + 1));
                stack.push((l, depth + 1));
            }
            Err(_) => return true,
        }
    }
    false
}

/// Constrained global minimization by best-first branch and bound.
pub fn minimize(
    obj: &dyn Fn(&IntervalBox) -> Interval,
    con: &dyn Fn(&IntervalBox) -> ThreeValued,
    acc: Acceptance,
    x: &IntervalBox,
    opts: &Options,
) -> MinimizeResult {
    let p = Problem { objective: obj, constraint: con, incumbent: None };
    minimize_traced(&p, acc, x, opts, &mut |_, _| {})
}

/// [`minimize`] with an incumbent search, reporting every box event to
/// `trace`.
///
/// The upper bound used for pruning is only lowered by boxes certified
/// feasible, by accepted boxes and by incumbents; an unknown box may hold no
/// feasible point at all, so its objective upper bound proves nothing.
pub fn minimize_traced(
    problem: &Problem,
    acc: Acceptance,
    x: &IntervalBox,
    opts: &Options,
    trace: &mut dyn FnMut(TraceEvent, &IntervalBox),
) -> MinimizeResult {
    let obj = problem.objective;
    let con = problem.constraint;
    let mut stats = Stats::default();
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let mut ub = opts.initial_upper;
    let mut best: Option<(f64, Point)> = None;
    let mut accepted: Vec<(IntervalBox, Interval)> = Vec::new();
    let mut converged = true;
    let mut gap_lower: Option<f64> = None;
    let mut next_incumbent_width = f64::INFINITY;
    let mut capped = None;
    let mut exhausted_lower = None;

    let mut admit = |b: IntervalBox, heap: &mut BinaryHeap<Entry>, stats: &mut Stats, ub: &mut f64, trace: &mut dyn FnMut(TraceEvent, &IntervalBox)| {
        let c = con(&b);
        if c == ThreeValued::Negative {
            stats.boxes_pruned_constraint += 1;
            trace(TraceEvent::PrunedConstraint, &b);
            return;
        }
        let v = obj(&b);
        if v.is_empty() || v.lo() > *ub || v.lo() == f64::INFINITY {
            stats.boxes_pruned_bound += 1;
            trace(TraceEvent::PrunedBound, &b);
            return;
        }
        if c == ThreeValued::Positive {
            *ub = ub.min(v.hi());
        }
        heap.push(Entry { lower: v.lo(), seq, b });
        seq += 1;
    };

    admit(*x, &mut heap, &mut stats, &mut ub, trace);
    while let Some(Entry { lower, b, .. }) = heap.pop() {
        if stats.boxes_explored >= opts.budget {
            converged = false;
            exhausted_lower = Some(lower.min(ub));
            break;
        }
        if lower > ub {
            stats.boxes_pruned_bound += 1;
            trace(TraceEvent::PrunedBound, &b);
            continue;
        }
        if lower >= opts.stop_at {
            capped = Some(lower);
            break;
        }
        stats.boxes_explored += 1;
        trace(TraceEvent::Explored, &b);
        // One incumbent search per halving of the popped box width keeps its
        // cost logarithmic in the resolution.
        if let (Some(inc), true) = (problem.incumbent, b.width() <= next_incumbent_width) {
            next_incumbent_width = 0.5 * b.width();
            if let Some((v, p)) = inc(&b) {
                if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                    best = Some((v, p));
                    ub = ub.min(v);
                }
            }
        }
        if let Some((bv, _)) = best {
            if opts.gap.closed(lower, bv) {
                // Every remaining box has a lower bound of at least `lower`.
                gap_lower = Some(lower);
                stats.boxes_accepted += 1;
                trace(TraceEvent::Accepted, &b);
                accepted.push((b, Interval::new(lower, bv.max(lower))));
                break;
            }
        }
        if acc.accepts(&b) {
            if opts.refine_levels > 0 && con(&b) != ThreeValued::Positive && !survives_refinement(&b, con, opts.refine_levels) {
                stats.boxes_pruned_constraint += 1;
                trace(TraceEvent::PrunedConstraint, &b);
                continue;
            }
            let v = obj(&b);
            ub = ub.min(v.hi());
            stats.boxes_accepted += 1;
            trace(TraceEvent::Accepted, &b);
            accepted.push((b, v));
            if opts.first_solution {
                break;
            }
            continue;
        }
        match b.subdivide() {
            Ok((l, r)) => {
                admit(l, &mut heap, &mut stats, &mut ub, trace);
                admit(r, &mut heap, &mut stats, &mut ub, trace);
            }
            Err(_) => {
                // Unreachable with a positive tolerance; accept defensively.
                let v = obj(&b);
                stats.boxes_accepted += 1;
                trace(TraceEvent::Accepted, &b);
                accepted.push((b, v));
            }
        }
    }

    let feasible = !accepted.is_empty();
    let accepted_empty = !feasible;
    let best_value = best.as_ref().map_or(f64::INFINITY, |b| b.0);
    let (minimum_bound, representative_point) = match accepted.first() {
        Some((b, v)) => {
            let lo = gap_lower.unwrap_or(v.lo());
            let hi = accepted.iter().fold(best_value, |m, (_, w)| m.min(w.hi()));
            let rep = match (&best, gap_lower) {
                (Some((_, p)), Some(_)) => *p,
                _ => b.midpoint(),
            };
            (Interval::new(lo, hi.max(lo)), Some(rep))
        }
        None => (Interval::EMPTY, None),
    };
    MinimizeResult {
        feasible,
        minimum_bound,
        accepted_boxes: accepted.into_iter().map(|(b, _)| b).collect(),
        representative_point,
        incumbent: best.map(|b| b.1),
        stats,
        converged,
        capped,
        exhausted_lower: if accepted_empty { exhausted_lower } else { None },
    }
}

/// Constraint satisfaction: collects fine boxes that may satisfy `con`.
///
/// Negative boxes are discarded; everything else is split until fine. A
/// fine box is accepted unless it is certainly infeasible, since a box
/// straddling an equality constraint can never be certified positive.
pub fn solve(con: &dyn Fn(&IntervalBox) -> ThreeValued, acc: Acceptance, x: &IntervalBox, opts: &Options) -> SolveResult {
    let mut boxes = Vec::new();
    let (stats, converged) = solve_streaming(con, acc, x, opts, &mut |_, _| {}, &mut |b, _| {
        boxes.push(*b);
        true
    });
    SolveResult { accepted_boxes: boxes, stats, converged }
}

/// Depth-first [`solve`] that hands each accepted box and its verdict to
/// `on_accept`; returning `false` stops the search early (reported as
/// converged).
pub fn solve_streaming(
    con: &dyn Fn(&IntervalBox) -> ThreeValued,
    acc: Acceptance,
    x: &IntervalBox,
    opts: &Options,
    trace: &mut dyn FnMut(TraceEvent, &IntervalBox),
    on_accept: &mut dyn FnMut(&IntervalBox, ThreeValued) -> bool,
) -> (Stats, bool) {
    let mut stats = Stats::default();
    let mut stack = vec![*x];
    while let Some(b) = stack.pop() {
        if stats.boxes_explored >= opts.budget {
            return (stats, false);
        }
        stats.boxes_explored += 1;
        trace(TraceEvent::Explored, &b);
        let c = con(&b);
        if c == ThreeValued::Negative {
            stats.boxes_pruned_constraint += 1;
            trace(TraceEvent::PrunedConstraint, &b);
            continue;
        }
        if acc.accepts(&b) {
            if c != ThreeValued::Positive && !survives_refinement(&b, con, opts.refine_levels) {
                stats.boxes_pruned_constraint += 1;
                trace(TraceEvent::PrunedConstraint, &b);
                continue;
            }
            stats.boxes_accepted += 1;
            trace(TraceEvent::Accepted, &b);
            if !on_accept(&b, c) {
                return (stats, true);
            }
            continue;
        }
        match b.subdivide() {
            Ok((l, r)) => {
                stack.push(r);
                stack.push(l);
            }
            Err(_) => {
                stats.boxes_accepted += 1;
                trace(TraceEvent::Accepted, &b);
                if !on_accept(&b, c) {
                    return (stats, true);
                }
            }
        }
    }
    (stats, true)
}
