use super::{add_stats, QueryConfig, Tracer};
use crate::field::ImplicitField;
use crate::interval::{Interval, IntervalBox, Point};
use crate::opt::{eq_zero, minimize_traced, Acceptance, Options, Problem, Stats};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayHit {
    /// Parameter enclosure of the hit along the ray.
    pub t: Interval,
    pub point: Point,
    /// Normalized gradient of the field at the hit.
    pub normal: Point,
    /// No sign change was found across `t`: a tangential touch, or a box the
    /// interval test could not rule out.
    pub grazing: bool,
}

#[derive(Clone, Debug)]
pub struct RayResult {
    pub hit: Option<RayHit>,
    pub stats: Stats,
    pub converged: bool,
}

/// First intersection of the ray `x + t v`, `0 < t ≤ t_max`, with the zero
/// set of `f`, by univariate branch and bound on `t`. With `skip_grazing`,
/// boxes without a verified sign change are stepped over.
pub fn ray_intersect(f: &ImplicitField, x: &[f64], v: &[f64], t_max: f64, skip_grazing: bool, cfg: &QueryConfig) -> RayResult {
    ray_intersect_traced(f, x, v, t_max, skip_grazing, cfg, &mut Tracer::none())
}

pub fn ray_intersect_traced(
    f: &ImplicitField,
    x: &[f64],
    v: &[f64],
    t_max: f64,
    skip_grazing: bool,
    cfg: &QueryConfig,
    tr: &mut Tracer,
) -> RayResult {
    let d = f.dim();
    let along = |t: Interval| {
        let mut dims = [Interval::ZERO; 3];
        for k in 0..d {
            dims[k] = Interval::point(x[k]) + t * Interval::point(v[k]);
        }
        IntervalBox::new(&dims[..d])
    };
    let at = |t: f64| {
        let mut p = Point::new(x);
        for k in 0..d {
            p[k] = x[k] + t * v[k];
        }
        p
    };
    let value = |t: f64| f.eval_value(&at(t));
    let obj = |b: &IntervalBox| b[0];
    let con = |b: &IntervalBox| eq_zero(f.eval_interval(&along(b[0])));
    let problem = Problem { objective: &obj, constraint: &con, incumbent: None };
    let opts = Options { budget: cfg.budget, first_solution: true, ..Options::default() };

    let mut stats = Stats::default();
    let mut t0 = 0.0;
    loop {
        if !(t0 < t_max) {
            return RayResult { hit: None, stats, converged: true };
        }
        let search = IntervalBox::new(&[Interval::new(t0, t_max)]);
        let r = minimize_traced(&problem, Acceptance::new(cfg.tol), &search, &opts, &mut |e, b| tr.emit(e, b));
        add_stats(&mut stats, &r.stats);
        if !r.converged {
            return RayResult { hit: None, stats, converged: false };
        }
        let Some(b) = r.accepted_boxes.first() else {
            return RayResult { hit: None, stats, converged: true };
        };
        let (a, c) = (b[0].lo(), b[0].hi());
        let (fa, fc) = (value(a), value(c));
        let sign_change = fa == 0.0 || fc == 0.0 || (fa < 0.0) != (fc < 0.0);
        if !sign_change && skip_grazing {
            t0 = c;
            continue;
        }
        let t = if sign_change { bisect_t(&value, a, c, fa) } else { b[0].mid() };
        if !(t > 0.0) {
            t0 = c;
            continue;
        }
        let point = at(t);
        let normal = f.gradient(&point).normalized().unwrap_or(Point::zeros(d));
        let hit = RayHit { t: Interval::new(a.max(f64::MIN_POSITIVE), c), point, normal, grazing: !sign_change };
        return RayResult { hit: Some(hit), stats, converged: true };
    }
}

fn bisect_t(value: &dyn Fn(f64) -> f64, mut a: f64, mut c: f64, fa: f64) -> f64 {
    if fa == 0.0 {
        return a;
    }
    let neg = fa < 0.0;
    for _ in 0..100 {
        let m = 0.5 * (a + c);
        if m <= a || m >= c {
            break;
        }
        let fm = value(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == neg {
            a = m;
        } else {
            c = m;
        }
    }
    0.5 * (a + c)
}
