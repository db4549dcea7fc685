use super::{add_stats, cpq_traced, psi_interval, QueryConfig, Tracer};
use crate::field::{ImplicitField, Scalar};
use crate::interval::{DualInterval, HessianInterval, Interval, IntervalBox, Point};
use crate::opt::{ball, conj, eq_zero, minimize_traced, Acceptance, Gap, Options, Problem, Stats};
use crate::scene::RobinCoefficientField;
use crate::surface::project_to_surface;

#[derive(Clone, Debug)]
pub struct RobinRadiusResult {
    /// Largest radius keeping every reflectance inside the ball in `[0, 1]`,
    /// capped at the silhouette radius.
    pub r_r: f64,
    /// The objective is infinite on every reachable boundary point, or no
    /// reflecting boundary lies within the silhouette radius.
    pub unbounded: bool,
    pub minimum_bound: Interval,
    /// Best boundary point found by the incumbent search.
    pub witness: Option<Point>,
    pub stats: Stats,
    pub converged: bool,
    /// The search ran out of budget and `r_r` is the boundary distance.
    pub fallback: bool,
}

/// Robin radius objective in terms of the distance `r`, the viewing cosine
/// and the Robin coefficient: `r exp(cos/(μ r))` in 2D and
/// `r / max(0, 1 − cos/(μ r))` in 3D. The cosine is clamped to `[0, 1]` and
/// `μ` to `[0, ∞)`.
pub fn robin_objective<S: Scalar>(dim: usize, r: S, cos: S, mu: S) -> S {
    let cos = cos.max(S::cst(0.0)).min(S::cst(1.0));
    let mu = mu.max(S::cst(0.0));
    let q = cos / (mu * r);
    if dim == 2 {
        r * q.exp()
    } else {
        r / (S::cst(1.0) - q).max(S::cst(0.0))
    }
}

/// Objective value at a single point `z` (not necessarily on the surface).
pub fn robin_objective_at(f: &ImplicitField, mu: &RobinCoefficientField, x: &[f64], z: &[f64]) -> f64 {
    let g = f.gradient(z);
    let d = Point::new(z).sub(x);
    let r = d.norm();
    let cos = g.dot(&d).abs() / (g.norm() * r);
    robin_objective(f.dim(), r, cos, mu.field.eval_value(z))
}

fn natural(f: &ImplicitField, mu: &RobinCoefficientField, x: &[f64], b: &IntervalBox) -> Interval {
    let g = f.eval_gradient(b);
    let r = Interval::norm_from(b, x);
    let cos = psi_interval(&g, b, x).abs() / (g.grad_norm() * r);
    robin_objective(f.dim(), r, cos, mu.field.eval_interval(b))
}

fn cross(p: &[Interval], d: &[Interval]) -> [Interval; 3] {
    if d.len() == 2 {
        [p[0] * d[1] - p[1] * d[0], Interval::ZERO, Interval::ZERO]
    } else {
        [p[1] * d[2] - p[2] * d[1], p[2] * d[0] - p[0] * d[2], p[0] * d[1] - p[1] * d[0]]
    }
}

/// Viewing cosine over a box, as the intersection of `|ψ| / (|∇f| r)` with
/// `sqrt(1 − |∇f × d|² / (|∇f|² r²))`. The cross product is also bounded by a
/// centered form using the Hessian, which makes the second expression
/// accurate to fourth order in the box width where the cosine is near one.
fn cosine_enclosure(h: &HessianInterval, gm: &DualInterval, b: &IntervalBox, x: &[f64]) -> Interval {
    let dim = b.dim();
    let p = h.partials();
    let m = b.midpoint();
    let d: Vec<Interval> = b.iter().zip(x).map(|(iv, &c)| *iv - Interval::point(c)).collect();
    let dm: Vec<Interval> = m.iter().zip(x).map(|(&v, &c)| Interval::point(v) - Interval::point(c)).collect();
    let r2 = d.iter().fold(Interval::ZERO, |a, v| a + v.sqr());
    let g2 = p.iter().fold(Interval::ZERO, |a, v| a + v.sqr());
    let psi = p.iter().zip(&d).fold(Interval::ZERO, |a, (u, v)| a + *u * *v);
    let unit = Interval::new(0.0, 1.0);
    let c1 = (psi.abs() / (g2.sqrt() * r2.sqrt())).intersect(&unit);

    let natural = cross(p, &d);
    let mut centered = cross(gm.partials(), &dm);
    for k in 0..dim {
        let col: Vec<Interval> = (0..dim).map(|i| h.second(i, k)).collect();
        let mut e = [Interval::ZERO; 3];
        e[k] = Interval::ONE;
        let a = cross(&col, &d);
        let c = cross(p, &e[..dim]);
        let step = b[k] - Interval::point(m[k]);
        for i in 0..3 {
            centered[i] = centered[i] + (a[i] + c[i]) * step;
        }
    }
    let cross2 = (0..3).fold(Interval::ZERO, |acc, i| {
        let both = natural[i].intersect(&centered[i]);
        acc + if both.is_empty() { natural[i] } else { both }.sqr()
    });
    let s = cross2 / (g2 * r2);
    let c2 = (Interval::ONE - s).clamp_nonneg().sqrt().intersect(&unit);
    let c = c1.intersect(&c2);
    if c.is_empty() { c1 } else { c }
}

/// Exact range of the objective over independent `r ∈ rr`, `cos ∈ cc` and
/// `μ ∈ mm`, up to rounding. The objective grows with the cosine, shrinks
/// with `μ` and is unimodal in `r` with its minimum at `r = cos/μ` (2D) or
/// `r = 2 cos/μ` (3D), where it equals `e cos/μ` or `4 cos/μ`.
fn objective_range(dim: usize, rr: Interval, cc: Interval, mm: Interval) -> Interval {
    let mm = mm.clamp_nonneg();
    if rr.is_empty() || cc.is_empty() || mm.is_empty() {
        return Interval::EMPTY;
    }
    let at = |r: f64, c: f64, m: f64| robin_objective(dim, Interval::point(r), Interval::point(c), Interval::point(m));
    let (c, m) = (cc.lo(), mm.hi());
    // The objective is never below the distance.
    let lo = if c == 0.0 || m == f64::INFINITY {
        rr.lo()
    } else if m == 0.0 {
        f64::INFINITY
    } else {
        let k = if dim == 2 { 1.0 } else { 2.0 };
        let r_star = k * c / m;
        let slack = 1e-9 * r_star;
        if r_star >= rr.lo() - slack && r_star <= rr.hi() + slack {
            let peak = if dim == 2 { Interval::ONE.exp() } else { Interval::point(4.0) };
            (peak * Interval::point(c) / Interval::point(m)).lo()
        } else if r_star < rr.lo() {
            at(rr.lo(), c, m).lo()
        } else {
            at(rr.hi(), c, m).lo()
        }
    };
    let (c, m) = (cc.hi(), mm.lo());
    let hi = at(rr.lo(), c, m).hi().max(at(rr.hi(), c, m).hi());
    Interval::try_new(lo.max(rr.lo()), hi.max(lo)).unwrap_or(Interval::new(lo, lo))
}

/// Objective over `b` as a dual number, giving an enclosure of its gradient.
fn objective_dual(h: &HessianInterval, mu: &RobinCoefficientField, x: &[f64], b: &IntervalBox) -> DualInterval {
    let z = DualInterval::lift(b);
    let d: Vec<DualInterval> = z.into_iter().zip(x).map(|(v, &c)| v - DualInterval::constant(Interval::point(c))).collect();
    let g: Vec<DualInterval> = (0..b.dim()).map(|i| h.gradient_dual(i)).collect();
    let zero = DualInterval::constant(Interval::ZERO);
    let r = d.iter().fold(zero, |a, v| a + v.sqr()).sqrt();
    let gn = g.iter().fold(zero, |a, v| a + v.sqr()).sqrt();
    let psi = g.iter().zip(&d).fold(zero, |a, (u, v)| a + *u * *v);
    let cos = psi.abs() / (gn * r);
    robin_objective(b.dim(), r, cos, mu.field.eval_gradient(b))
}

/// Enclosure of the objective over the surface points in `b`: the exact
/// range over the distance, cosine and coefficient enclosures, intersected
/// with a mean-value form around the midpoint.
///
/// The mean-value form expands `F + λ f` with `λ` chosen to cancel the
/// normal component of the gradient. The two agree on the surface, and the
/// expansion is second order in the box width near a constrained minimum.
pub fn robin_objective_box(f: &ImplicitField, mu: &RobinCoefficientField, x: &[f64], b: &IntervalBox) -> Interval {
    let h = f.eval_hessian(b);
    let m = b.midpoint();
    let pm = IntervalBox::from_point(&m);
    let gm = f.eval_gradient(&pm);
    let cos = cosine_enclosure(&h, &gm, b, x);
    let range = objective_range(f.dim(), Interval::norm_from(b, x), cos, mu.field.eval_interval(b));
    if range.is_empty() || range.hi() == f64::INFINITY {
        return range;
    }
    let grad = objective_dual(&h, mu, x, b);
    let gf = h.partials();
    let (num, den) = grad.partials().iter().zip(gf).fold((0.0, 0.0), |(n, d), (a, g)| (n + a.mid() * g.mid(), d + g.mid() * g.mid()));
    let lambda = if den > 0.0 && (num / den).is_finite() { -num / den } else { 0.0 };
    let lam = Interval::point(lambda);
    let mut centered = natural(f, mu, x, &pm) + lam * f.eval_interval(&pm);
    for (k, (p, g)) in grad.partials().iter().zip(gf).enumerate() {
        centered = centered + (*p + lam * *g) * (b[k] - Interval::point(m[k]));
    }
    let both = range.intersect(&centered);
    if both.is_empty() { range } else { both }
}

/// Robin radius bound: minimizes the objective over reflecting-boundary
/// points within `B(x, r_s)` and returns the lower end of the enclosure,
/// capped at `r_s`.
pub fn rrbq(f: &ImplicitField, mu: &RobinCoefficientField, x: &[f64], r_s: f64, cfg: &QueryConfig) -> RobinRadiusResult {
    rrbq_traced(f, mu, x, r_s, cfg, &mut Tracer::none())
}

pub fn rrbq_traced(
    f: &ImplicitField,
    mu: &RobinCoefficientField,
    x: &[f64],
    r_s: f64,
    cfg: &QueryConfig,
    tr: &mut Tracer,
) -> RobinRadiusResult {
    let obj = |b: &IntervalBox| robin_objective_box(f, mu, x, b);
    let con = |b: &IntervalBox| conj([ball(b, x, r_s), eq_zero(f.eval_interval(b))]);
    let inc = |b: &IntervalBox| {
        let p = project_to_surface(f, &b.midpoint(), 2.0 * b.width() + cfg.tol, 1e-13)?;
        if p.distance(x) > r_s {
            return None;
        }
        let v = natural(f, mu, x, &IntervalBox::from_point(&p)).hi();
        v.is_finite().then_some((v, p))
    };
    let problem = Problem { objective: &obj, constraint: &con, incumbent: Some(&inc) };
    let opts = Options {
        budget: cfg.budget,
        gap: Gap::Absolute(0.5 * cfg.tol),
        stop_at: r_s - 0.5 * cfg.tol,
        ..Options::default()
    };
    let search = IntervalBox::cube(x, r_s);
    let r = minimize_traced(&problem, Acceptance::new(cfg.tol), &search, &opts, &mut |e, b| tr.emit(e, b));
    let mut stats = r.stats;
    if !r.converged {
        let c = cpq_traced(f, x, &search, None, cfg, tr);
        add_stats(&mut stats, &c.stats);
        return RobinRadiusResult {
            r_r: c.r_d.lo().min(r_s),
            unbounded: false,
            minimum_bound: r.minimum_bound,
            witness: r.incumbent,
            stats,
            converged: false,
            fallback: true,
        };
    }
    let (r_r, unbounded, bound) = if let Some(lo) = r.capped {
        let unbounded = lo == f64::INFINITY || (cfg.classify_unbounded && !has_finite_value(&problem, &search, cfg));
        (lo.min(r_s), unbounded, Interval::new(lo, f64::INFINITY))
    } else if r.feasible {
        (r.minimum_bound.lo().min(r_s), false, r.minimum_bound)
    } else {
        (r_s, true, Interval::new(f64::INFINITY, f64::INFINITY))
    };
    RobinRadiusResult { r_r, unbounded, minimum_bound: bound, witness: r.incumbent, stats, converged: true, fallback: false }
}

/// Whether some boundary point in the search region has a finite objective.
/// Runs best-first until the incumbent search finds one.
fn has_finite_value(problem: &Problem, search: &IntervalBox, cfg: &QueryConfig) -> bool {
    let opts = Options { budget: cfg.budget, gap: Gap::Absolute(f64::INFINITY), ..Options::default() };
    let r = minimize_traced(problem, Acceptance::new(cfg.tol), search, &opts, &mut |_, _| {});
    r.feasible || !r.converged
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mu(c: f64, dim: usize) -> RobinCoefficientField {
        RobinCoefficientField::new(ImplicitField::constant(c, dim))
    }

    #[test]
    fn circle_center_gives_e() {
        let f = ImplicitField::parse("circle(0, 0, 1)", 2).unwrap();
        let cfg = QueryConfig::new(1e-4);
        let r = rrbq(&f, &mu(1.0, 2), &[0.0, 0.0], 5.0, &cfg);
        assert!(r.converged && !r.unbounded);
        assert!((r.r_r - std::f64::consts::E).abs() < 10.0 * cfg.tol, "{}", r.r_r);
        assert!(r.r_r <= std::f64::consts::E + 1e-12);
    }

    #[test]
    fn capped_by_silhouette_radius() {
        let f = ImplicitField::parse("circle(0, 0, 1)", 2).unwrap();
        let cfg = QueryConfig::new(1e-4);
        let r = rrbq(&f, &mu(1.0, 2), &[0.0, 0.0], 2.0, &cfg);
        assert_eq!(r.r_r, 2.0);
        assert!(!r.unbounded);
    }

    #[test]
    fn sphere_center_cases() {
        let f = ImplicitField::parse("sphere(0, 0, 0, 1)", 3).unwrap();
        let cfg = QueryConfig::new(1e-4);
        let r = rrbq(&f, &mu(2.0, 3), &[0.0, 0.0, 0.0], 5.0, &cfg);
        assert!(r.converged && !r.unbounded);
        assert!((r.r_r - 2.0).abs() < 10.0 * cfg.tol, "{}", r.r_r);
        let r = rrbq(&f, &mu(0.5, 3), &[0.0, 0.0, 0.0], 5.0, &cfg);
        assert!(r.unbounded && r.r_r == 5.0, "{r:?}");
    }

    #[test]
    fn large_mu_approaches_distance() {
        let f = ImplicitField::parse("circle(0, 0, 1)", 2).unwrap();
        let cfg = QueryConfig::new(1e-4);
        let r = rrbq(&f, &mu(1e6, 2), &[0.3, 0.0], 5.0, &cfg);
        assert!((r.r_r - 0.7).abs() < 1e-3, "{}", r.r_r);
    }

    #[test]
    fn box_enclosure_contains_surface_values() {
        let f = ImplicitField::parse("circle(0.1, 0, 1) + 0.2 * x * y", 2).unwrap();
        let m = mu(0.7, 2);
        let x = [0.05, -0.1];
        let pts: Vec<Point> = (0..=40)
            .filter_map(|i| {
                let t = 0.8 + 0.005 * i as f64;
                project_to_surface(&f, &Point::new(&[0.1 + t.cos(), t.sin()]), 0.5, 1e-14)
            })
            .collect();
        assert!(pts.len() > 30);
        let lo = |k: usize| pts.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min) - 0.01;
        let hi = |k: usize| pts.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max) + 0.01;
        let b = IntervalBox::from_bounds(&[(lo(0), hi(0)), (lo(1), hi(1))]);
        let e = robin_objective_box(&f, &m, &x, &b);
        for p in &pts {
            let v = robin_objective_at(&f, &m, &x, p);
            assert!(v >= e.lo() - 1e-12 && v <= e.hi() + 1e-12, "{v} {e:?}");
        }
    }
}
