use super::{add_stats, cpq_traced, cspq_traced, rrbq_traced, QueryConfig, Tracer};
use crate::interval::{Interval, Point};
use crate::opt::Stats;
use crate::scene::Scene;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StarFlags {
    pub dirichlet_absent: bool,
    pub reflecting_absent: bool,
    pub rrbq_unbounded: bool,
    /// Some sub-query ran out of budget and fell back to a distance bound.
    pub nonconverged: bool,
    /// The silhouette radius could not be certified and was replaced by the
    /// distance to the reflecting boundary.
    pub certification_fallback: bool,
}

/// The per-step radii of a walk-on-stars step at `x`.
#[derive(Clone, Debug)]
pub struct StarRegion {
    pub x: Point,
    /// Distance to the Dirichlet boundary.
    pub r_d: Interval,
    pub closest_dirichlet: Option<Point>,
    /// Silhouette radius after the shrink.
    pub r_s: f64,
    /// Robin radius.
    pub r_r: f64,
    pub flags: StarFlags,
    pub stats: Stats,
}

/// Runs the Dirichlet, silhouette and Robin radius queries in sequence.
pub fn star_radius(scene: &Scene, x: &[f64], cfg: &QueryConfig) -> StarRegion {
    star_radius_traced(scene, x, None, cfg, &mut Tracer::none())
}

/// [`star_radius`] with an optional known-attained Dirichlet distance (for
/// example the distance to the previous step's closest point) to speed up
/// the first query.
pub fn star_radius_traced(scene: &Scene, x: &[f64], dirichlet_hint: Option<f64>, cfg: &QueryConfig, tr: &mut Tracer) -> StarRegion {
    let mut stats = Stats::default();
    let mut flags = StarFlags::default();

    let (r_d, closest_dirichlet) = match &scene.dirichlet {
        Some(b) => {
            let c = cpq_traced(&b.field, x, &scene.domain, dirichlet_hint, cfg, tr);
            add_stats(&mut stats, &c.stats);
            flags.nonconverged |= !c.converged;
            flags.dirichlet_absent = c.absent;
            (c.r_d, c.closest)
        }
        None => {
            flags.dirichlet_absent = true;
            (Interval::new(f64::INFINITY, f64::INFINITY), None)
        }
    };

    let Some(refl) = &scene.reflecting else {
        flags.reflecting_absent = true;
        let r = r_d.lo();
        return StarRegion { x: Point::new(x), r_d, closest_dirichlet, r_s: r, r_r: r, flags, stats };
    };

    let cap = if r_d.lo().is_finite() { r_d.lo() } else { farthest_corner(scene, x) };
    let s = cspq_traced(&refl.field, x, cap, cfg, tr);
    add_stats(&mut stats, &s.stats);
    flags.nonconverged |= !s.converged;
    flags.certification_fallback = !s.certified;
    let r_s = s.r_s.min(cap);

    let r_r = match &scene.robin {
        Some(mu) if scene.has_robin() => {
            let r = rrbq_traced(&refl.field, mu, x, r_s, cfg, tr);
            add_stats(&mut stats, &r.stats);
            flags.nonconverged |= !r.converged;
            flags.rrbq_unbounded = r.unbounded;
            r.r_r.min(r_s)
        }
        _ => r_s,
    };
    StarRegion { x: Point::new(x), r_d, closest_dirichlet, r_s, r_r, flags, stats }
}

fn farthest_corner(scene: &Scene, x: &[f64]) -> f64 {
    scene
        .domain
        .iter()
        .zip(x)
        .map(|(iv, &c)| (iv.lo() - c).abs().max((iv.hi() - c).abs()).powi(2))
        .sum::<f64>()
        .sqrt()
}
