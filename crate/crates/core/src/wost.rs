//! Walk-on-stars estimator for Laplace problems with Dirichlet and
//! Neumann or Robin boundaries.
//!
//! Each step queries the star-shaped region around the walker. Inside the
//! Dirichlet epsilon-shell the walk returns the boundary value. Otherwise a
//! uniform direction is cast: a hit on the reflecting boundary within the
//! star radius scales the throughput by the Robin reflectance and adds the
//! boundary-data term, and a miss moves the walker to the sphere point.
//!
//! With the Robin condition `∂u/∂n + μ u = h` (`n` pointing out of the
//! domain) and the ball Green's function `G` and Poisson kernel `P` of the
//! star radius `R`, a hit at distance `r` and viewing cosine `cos θ` has
//! `G/P = r ln(R/r) / cos θ` in 2D and `r (1 − r/R) / cos θ` in 3D. The
//! reflectance is `1 − μ G/P` and the data term is `h G/P`, since uniform
//! direction sampling has density exactly `P` on the boundary.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::interval::Point;
use crate::query::{ray_intersect, star_radius_traced, QueryConfig, Tracer};
use crate::scene::Scene;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkConfig {
    /// Dirichlet termination shell.
    pub epsilon_shell: f64,
    /// Smallest step radius; reflecting hits are nudged inward by half of it.
    pub r_min: f64,
    pub max_steps: usize,
    pub n_walks: usize,
    pub seed: u64,
    pub query: QueryConfig,
}

impl WalkConfig {
    pub fn for_scene(scene: &Scene) -> WalkConfig {
        let mut query = QueryConfig::for_scene(scene);
        query.classify_unbounded = false;
        WalkConfig {
            epsilon_shell: scene.epsilon_shell,
            r_min: scene.epsilon_shell / 2.0,
            max_steps: 10_000,
            n_walks: 1000,
            seed: 0,
            query,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WalkError {
    #[error("point {0} is not inside the domain")]
    OutsideDomain(Point),
    #[error("all {0} walks hit the step limit; increase max_steps")]
    AllTruncated(usize),
    #[error("the scene has no Dirichlet boundary, so walks cannot terminate")]
    NoDirichlet,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WalkOutcome {
    pub value: f64,
    pub steps: usize,
    pub truncated: bool,
    pub reflections: usize,
    /// Reflectances that fell outside `[0, 1]` and were clamped; this only
    /// happens when the Robin radius is below the minimum step.
    pub rho_clamps: usize,
    /// Smallest and largest throughput seen along the walk.
    pub min_throughput: f64,
    pub max_throughput: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateStats {
    pub mean: f64,
    pub std_error: f64,
    pub n_walks: usize,
    pub mean_steps: f64,
    pub truncated_walks: usize,
    pub rho_clamps: usize,
}

/// `G/P` for a boundary point at distance `r` inside a ball of radius
/// `radius`, seen under viewing cosine `cos`.
pub fn green_over_poisson(dim: usize, r: f64, radius: f64, cos: f64) -> f64 {
    let g = if dim == 2 { r * (radius / r).ln() } else { r * (1.0 - r / radius) };
    g.max(0.0) / cos
}

/// Robin reflectance `1 − μ G/P`; equals one for Neumann boundaries.
pub fn reflectance(dim: usize, mu: f64, r: f64, radius: f64, cos: f64) -> f64 {
    if mu == 0.0 {
        return 1.0;
    }
    1.0 - mu * green_over_poisson(dim, r, radius, cos)
}

/// Uniform unit vector.
pub fn random_direction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Point {
    let mut v = Point::zeros(dim);
    if dim == 2 {
        let a = rng.random::<f64>() * std::f64::consts::TAU;
        v[0] = a.cos();
        v[1] = a.sin();
    } else {
        let z = 2.0 * rng.random::<f64>() - 1.0;
        let a = rng.random::<f64>() * std::f64::consts::TAU;
        let s = (1.0 - z * z).max(0.0).sqrt();
        v[0] = s * a.cos();
        v[1] = s * a.sin();
        v[2] = z;
    }
    v
}

/// Random stream for walk `walk` of evaluation point `point`.
pub fn walk_rng(seed: u64, point: u64, walk: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&point.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(walk);
    rng
}

/// One walk from `x0`.
pub fn walk_once<R: Rng + ?Sized>(scene: &Scene, x0: &[f64], cfg: &WalkConfig, rng: &mut R) -> WalkOutcome {
    let dim = scene.dim;
    let mut x = Point::new(x0);
    let mut throughput = 1.0;
    let mut acc = 0.0;
    let mut out = WalkOutcome { min_throughput: 1.0, max_throughput: 1.0, ..WalkOutcome::default() };
    let mut hint: Option<Point> = None;
    let delta = 0.5 * cfg.r_min;
    loop {
        let h = hint.map(|c| c.distance(&x));
        let star = star_radius_traced(scene, &x, h, &cfg.query, &mut Tracer::none());
        hint = star.closest_dirichlet;
        let boundary_value = |star_closest: Option<Point>| star_closest.map_or(0.0, |c| scene.dirichlet_data.eval_value(&c));
        if star.r_d.lo() <= cfg.epsilon_shell {
            out.value = acc + throughput * boundary_value(star.closest_dirichlet);
            return out;
        }
        if out.steps >= cfg.max_steps {
            out.truncated = true;
            out.value = acc + throughput * boundary_value(star.closest_dirichlet);
            return out;
        }
        out.steps += 1;
        let radius = star.r_r.max(cfg.r_min);
        let v = random_direction(dim, rng);
        let hit = scene
            .reflecting
            .as_ref()
            .and_then(|b| ray_intersect(&b.field, &x, &v, radius, true, &cfg.query).hit);
        let Some(hit) = hit else {
            x = x.offset(&v, radius);
            continue;
        };
        let refl = scene.reflecting.as_ref().expect("hit implies a reflecting boundary");
        let z = hit.point;
        let r = z.distance(&x);
        let cos = hit.normal.dot(&v).abs().max(f64::MIN_POSITIVE);
        let mu = scene.mu_at(&z);
        let data = scene.robin_data.eval_value(&z);
        if mu != 0.0 || data != 0.0 {
            acc += throughput * data * green_over_poisson(dim, r, radius, cos);
        }
        let mut rho = reflectance(dim, mu, r, radius, cos);
        if !(0.0..=1.0).contains(&rho) {
            out.rho_clamps += 1;
            rho = rho.clamp(0.0, 1.0);
        }
        throughput *= rho;
        out.reflections += 1;
        // The walker restarts a small distance inside the domain; first-order
        // Taylor expansion of the Robin condition across that gap.
        let n_in = refl.inward_normal(&z).unwrap_or_else(|| v.scale(-1.0));
        throughput /= 1.0 + delta * mu;
        acc += throughput * delta * data;
        out.min_throughput = out.min_throughput.min(throughput);
        out.max_throughput = out.max_throughput.max(throughput);
        x = z.offset(&n_in, delta);
    }
}

/// Pairwise (cascade) summation, independent of scheduling.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Monte Carlo estimate at `x` for evaluation-point index `point`.
pub fn estimate_indexed(scene: &Scene, x: &[f64], point: u64, cfg: &WalkConfig) -> Result<EstimateStats, WalkError> {
    if scene.dirichlet.is_none() {
        return Err(WalkError::NoDirichlet);
    }
    if !scene.contains(x) {
        return Err(WalkError::OutsideDomain(Point::new(x)));
    }
    let outcomes: Vec<WalkOutcome> = (0..cfg.n_walks as u64)
        .into_par_iter()
        .map(|w| walk_once(scene, x, cfg, &mut walk_rng(cfg.seed, point, w)))
        .collect();
    summarize(&outcomes)
}

/// Monte Carlo estimate at `x`.
pub fn estimate(scene: &Scene, x: &[f64], cfg: &WalkConfig) -> Result<EstimateStats, WalkError> {
    estimate_indexed(scene, x, 0, cfg)
}

pub fn summarize(outcomes: &[WalkOutcome]) -> Result<EstimateStats, WalkError> {
    let n = outcomes.len();
    let truncated = outcomes.iter().filter(|o| o.truncated).count();
    if n == 0 || truncated == n {
        return Err(WalkError::AllTruncated(n));
    }
    let values: Vec<f64> = outcomes.iter().map(|o| o.value).collect();
    let mean = pairwise_sum(&values) / n as f64;
    let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = if n > 1 { pairwise_sum(&dev) / (n - 1) as f64 } else { 0.0 };
    let steps: Vec<f64> = outcomes.iter().map(|o| o.steps as f64).collect();
    Ok(EstimateStats {
        mean,
        std_error: (var / n as f64).sqrt(),
        n_walks: n,
        mean_steps: pairwise_sum(&steps) / n as f64,
        truncated_walks: truncated,
        rho_clamps: outcomes.iter().map(|o| o.rho_clamps).sum(),
    })
}

/// Regular grid over an axis-aligned region, `counts[k]` nodes per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub lo: Point,
    pub hi: Point,
    pub counts: Vec<usize>,
}

impl GridSpec {
    pub fn points(&self) -> Vec<Point> {
        let dim = self.lo.dim();
        let total: usize = self.counts.iter().product();
        let coord = |k: usize, i: usize| {
            let n = self.counts[k];
            if n <= 1 {
                0.5 * (self.lo[k] + self.hi[k])
            } else {
                self.lo[k] + (self.hi[k] - self.lo[k]) * i as f64 / (n - 1) as f64
            }
        };
        (0..total)
            .map(|mut idx| {
                let mut p = Point::zeros(dim);
                for k in 0..dim {
                    p[k] = coord(k, idx % self.counts[k]);
                    idx /= self.counts[k];
                }
                p
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSample {
    pub point: Point,
    /// `None` outside the domain.
    pub estimate: Option<EstimateStats>,
}

/// Estimates at every grid node (x fastest). Nodes outside the domain or
/// within the Dirichlet shell are reported as absent.
pub fn grid_estimate(scene: &Scene, grid: &GridSpec, cfg: &WalkConfig) -> Vec<GridSample> {
    grid.points()
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let estimate = estimate_indexed(scene, &p, i as u64, cfg).ok();
            GridSample { point: p, estimate }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const DISK_CONST: &str = "dimension 2\ndomain -1.5 1.5 -1.5 1.5\nepsilon 1e-3\n\
                              dirichlet inside circle(0, 0, 1)\ndirichlet_value 2.5\n";

    #[test]
    fn reflectance_limits() {
        assert_eq!(reflectance(2, 0.0, 0.3, 1.0, 0.5), 1.0);
        assert_eq!(reflectance(3, 0.0, 0.3, 1.0, 0.5), 1.0);
        // At the Robin radius of a circle seen from its center the
        // reflectance vanishes: R = e, r = 1, cos = 1, μ = 1.
        assert!(reflectance(2, 1.0, 1.0, std::f64::consts::E, 1.0).abs() < 1e-15);
        assert!(reflectance(3, 2.0, 1.0, 2.0, 1.0).abs() < 1e-15);
        assert_eq!(reflectance(2, 1.0, 1.0, 1.0, 1.0), 1.0);
    }

    #[test]
    fn directions_are_unit() {
        let mut rng = walk_rng(1, 2, 3);
        for d in [2, 3] {
            for _ in 0..100 {
                assert!((random_direction(d, &mut rng).norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let a: u64 = walk_rng(7, 0, 0).random();
        let b: u64 = walk_rng(7, 0, 1).random();
        let c: u64 = walk_rng(7, 1, 0).random();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, walk_rng(7, 0, 0).random::<u64>());
    }

    #[test]
    fn pairwise_matches_plain_sum() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64 * 0.5).collect();
        assert_eq!(pairwise_sum(&v), v.iter().sum::<f64>());
    }

    #[test]
    fn constant_dirichlet_has_zero_variance() {
        let s = Scene::parse(DISK_CONST).unwrap();
        let mut cfg = WalkConfig::for_scene(&s);
        cfg.n_walks = 50;
        let e = estimate(&s, &[0.2, -0.3], &cfg).unwrap();
        assert_eq!(e.mean, 2.5);
        assert_eq!(e.std_error, 0.0);
        assert_eq!(e.truncated_walks, 0);
    }

    #[test]
    fn outside_point_is_rejected() {
        let s = Scene::parse(DISK_CONST).unwrap();
        let cfg = WalkConfig::for_scene(&s);
        assert!(matches!(estimate(&s, &[1.2, 0.0], &cfg), Err(WalkError::OutsideDomain(_))));
    }

    #[test]
    fn grid_marks_outside_nodes() {
        let s = Scene::parse(DISK_CONST).unwrap();
        let mut cfg = WalkConfig::for_scene(&s);
        cfg.n_walks = 4;
        let g = GridSpec { lo: Point::new(&[-1.4, 0.0]), hi: Point::new(&[0.0, 0.0]), counts: vec![3, 1] };
        let out = grid_estimate(&s, &g, &cfg);
        assert_eq!(out.len(), 3);
        assert!(out[0].estimate.is_none());
        assert_eq!(out[2].estimate.unwrap().mean, 2.5);
    }
}
