use super::{add_stats, cpq_traced, dist2, QueryConfig, Tracer};
use crate::field::ImplicitField;
use crate::interval::{DualInterval, Interval, IntervalBox, Point, ThreeValued};
use crate::opt::{ball, conj, eq_zero, minimize_traced, solve_streaming, Acceptance, Gap, Options, Problem, Stats};
use crate::surface::project_to_pair;

#[derive(Clone, Debug)]
pub struct SilhouetteResult {
    /// Distance to the nearest silhouette point, capped at the search radius.
    pub r_s_raw: f64,
    pub shrink_factor: f64,
    /// Certified radius: every surface point strictly inside it faces `x`.
    pub r_s: f64,
    pub witness: Option<Point>,
    /// A silhouette point was found within the search radius.
    pub feasible: bool,
    pub certified: bool,
    /// Halving rounds spent after a failed certification.
    pub rounds: u32,
    pub minimum_bound: Interval,
    pub stats: Stats,
    pub converged: bool,
}

/// `∇f(z) · (z − x)` over a box, from a dual evaluation of `f`.
pub fn psi_interval(g: &DualInterval, b: &IntervalBox, x: &[f64]) -> Interval {
    g.partials()
        .iter()
        .zip(b.iter().zip(x))
        .fold(Interval::ZERO, |acc, (gi, (iv, &c))| acc + *gi * (*iv - Interval::point(c)))
}

/// Silhouette bound around `x`: the distance to the nearest point with
/// `f = 0` and `∇f · (z − x) = 0` inside `B(x, r_cap)`, shrunk and then
/// certified so that no surface point inside the returned ball is viewed
/// edge-on.
pub fn cspq(f: &ImplicitField, x: &[f64], r_cap: f64, cfg: &QueryConfig) -> SilhouetteResult {
    cspq_traced(f, x, r_cap, cfg, &mut Tracer::none())
}

pub fn cspq_traced(f: &ImplicitField, x: &[f64], r_cap: f64, cfg: &QueryConfig, tr: &mut Tracer) -> SilhouetteResult {
    let obj = |b: &IntervalBox| dist2(b, x);
    let con = |b: &IntervalBox| {
        let g = f.eval_gradient(b);
        conj([ball(b, x, r_cap), eq_zero(g.value), eq_zero(psi_interval(&g, b, x))])
    };
    let psi = |z: &[f64]| f.gradient(z).dot(&Point::new(z).sub(x));
    let inc = |b: &IntervalBox| {
        let p = project_to_pair(|z| f.eval_value(z), |z| f.gradient(z), psi, &b.midpoint(), 12, 1e-12)?;
        let d = p.distance(x);
        (d <= r_cap).then_some((d * d, p))
    };
    let problem = Problem { objective: &obj, constraint: &con, incumbent: Some(&inc) };
    let opts = Options {
        budget: cfg.budget,
        first_solution: true,
        gap: Gap::SqrtAbsolute(cfg.tol),
        ..Options::default()
    };
    let search = IntervalBox::cube(x, r_cap);
    let r = minimize_traced(&problem, Acceptance::new(cfg.tol), &search, &opts, &mut |e, b| tr.emit(e, b));
    let mut stats = r.stats;
    let mut converged = r.converged;
    let r_s_raw = if r.feasible { r.minimum_bound.sqrt().lo().min(r_cap) } else { r_cap };
    let witness = r.incumbent.or(r.representative_point).filter(|_| r.feasible);
    let shrink_factor = 1.0 - cfg.shrink;

    let mut radius = r_s_raw * shrink_factor;
    let mut certified = false;
    let mut rounds = 0;
    let mut surface_lower: Option<f64> = None;
    if converged {
        loop {
            let (ok, s) = certify(f, x, radius, cfg, tr);
            add_stats(&mut stats, &s);
            if ok {
                certified = true;
                break;
            }
            if rounds == cfg.cert_rounds {
                break;
            }
            rounds += 1;
            let d = *surface_lower.get_or_insert_with(|| {
                let c = cpq_traced(f, x, &IntervalBox::cube(x, radius), None, cfg, tr);
                add_stats(&mut stats, &c.stats);
                if c.absent { radius } else { c.r_d.lo() }
            });
            radius = 0.5 * (radius + d);
        }
    }
    if !certified {
        // No surface point lies strictly closer than the distance lower bound.
        let d = match surface_lower {
            Some(d) => d,
            None => {
                let c = cpq_traced(f, x, &IntervalBox::cube(x, r_cap), None, cfg, tr);
                add_stats(&mut stats, &c.stats);
                converged &= c.converged;
                if c.absent { r_cap } else { c.r_d.lo() }
            }
        };
        radius = d.min(radius);
    }
    SilhouetteResult {
        r_s_raw,
        shrink_factor,
        r_s: radius,
        witness,
        feasible: r.feasible,
        certified,
        rounds,
        minimum_bound: r.minimum_bound,
        stats,
        converged,
    }
}

/// Checks that `∇f · (z − x)` is bounded away from zero on every box covering
/// `B(x, radius) ∩ {f = 0}`; equivalently the viewing cosine is positive.
fn certify(f: &ImplicitField, x: &[f64], radius: f64, cfg: &QueryConfig, tr: &mut Tracer) -> (bool, Stats) {
    if !(radius > 0.0) {
        return (true, Stats::default());
    }
    let con = |b: &IntervalBox| {
        let bl = ball(b, x, radius);
        if bl == ThreeValued::Negative {
            return bl;
        }
        let g = f.eval_gradient(b);
        conj([bl, eq_zero(g.value), eq_zero(psi_interval(&g, b, x))])
    };
    let acc = Acceptance::new(cfg.tol / f64::powi(2.0, cfg.cert_depth as i32));
    let opts = Options { budget: cfg.budget, ..Options::default() };
    let mut failed = false;
    let (stats, converged) = solve_streaming(&con, acc, &IntervalBox::cube(x, radius), &opts, &mut |e, b| tr.emit(e, b), &mut |_, _| {
        failed = true;
        false
    });
    (converged && !failed, stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle() -> ImplicitField {
        ImplicitField::parse("circle(0, 0, 1)", 2).unwrap()
    }

    #[test]
    fn tangency_from_distance_two() {
        let cfg = QueryConfig::new(1e-4);
        let r = cspq(&circle(), &[2.0, 0.0], 5.0, &cfg);
        assert!(r.feasible && r.certified && r.converged);
        assert!((r.r_s_raw - 3f64.sqrt()).abs() < 10.0 * cfg.tol, "{}", r.r_s_raw);
        assert!((r.r_s / r.shrink_factor - 3f64.sqrt()).abs() < 10.0 * cfg.tol);
        let w = r.witness.unwrap();
        assert!((w[0] - 0.5).abs() < 1e-3 && (w[1].abs() - 0.75f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn capped_when_tangency_is_farther() {
        let cfg = QueryConfig::new(1e-4);
        let r = cspq(&circle(), &[2.0, 0.0], 1.2, &cfg);
        assert!(!r.feasible && r.certified);
        assert_eq!(r.r_s_raw, 1.2);
        assert!((r.r_s - 1.2 * (1.0 - 1e-3)).abs() < 1e-12);
    }

    #[test]
    fn no_silhouette_from_center() {
        let cfg = QueryConfig::new(1e-4);
        let r = cspq(&circle(), &[0.0, 0.0], 3.0, &cfg);
        assert!(!r.feasible && r.certified);
        assert!((r.r_s - 3.0 * (1.0 - 1e-3)).abs() < 1e-12);
    }
}
