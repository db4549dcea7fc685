//! Pointwise checks of the star-region radii, shared by the integration
//! tests and the acceptance suite.

use wost_implicit::oracle::{ball_surface_samples, closest_point, reflectance, robin_radius};
use wost_implicit::query::{cpq, star_radius, QueryConfig, StarRegion};
use wost_implicit::{IntervalBox, Point, Scene};

use super::oracle_resolution;

/// Viewing cosine of a reflecting-boundary point `z` from `x`, positive when
/// the boundary faces `x`.
pub fn facing_cosine(scene: &Scene, x: &[f64], z: &Point) -> f64 {
    let n = scene.reflecting.as_ref().unwrap().inward_normal(z).unwrap();
    let d = Point::new(x).sub(z);
    n.dot(&d) / d.norm()
}

/// Reflectances of about `n` reflecting-boundary points inside `B(x, radius)`,
/// evaluated for a ball of that radius.
pub fn reflectances(scene: &Scene, x: &[f64], radius: f64, n: usize) -> Vec<f64> {
    let f = &scene.reflecting.as_ref().unwrap().field;
    ball_surface_samples(f, x, radius, n)
        .into_iter()
        .map(|z| {
            let r = z.distance(x);
            reflectance(scene.dim, scene.mu_at(&z), r, radius, facing_cosine(scene, x, &z))
        })
        .collect()
}

/// Smallest facing cosine over about `n` reflecting-boundary points within
/// `radius`; `None` when the ball holds no boundary.
pub fn min_facing_cosine(scene: &Scene, x: &[f64], radius: f64, n: usize) -> Option<f64> {
    let f = &scene.reflecting.as_ref().unwrap().field;
    ball_surface_samples(f, x, radius, n).iter().map(|z| facing_cosine(scene, x, z)).min_by(f64::total_cmp)
}

/// Robin radii over a sweep of constant coefficients, and the distance to
/// the reflecting boundary capped at the silhouette radius.
pub fn mu_sweep(scene: &Scene, x: &[f64], mus: &[f64]) -> (Vec<StarRegion>, f64) {
    let cfg = QueryConfig::for_scene(scene);
    let stars: Vec<StarRegion> = mus.iter().map(|&m| star_radius(&scene.with_constant_mu(m), x, &cfg)).collect();
    let f = &scene.reflecting.as_ref().unwrap().field;
    let r_s = stars[0].r_s;
    let d = cpq(f, x, &IntervalBox::cube(x, r_s), None, &cfg);
    (stars, d.r_d.lo().min(r_s))
}

/// Distance from `x` to the dense minimizer of the Robin objective, when
/// one exists inside the silhouette radius.
pub fn dense_minimizer_distance(scene: &Scene, x: &[f64], r_s: f64) -> Option<f64> {
    let f = &scene.reflecting.as_ref()?.field;
    let mu = &scene.robin.as_ref()?.field;
    robin_radius(f, mu, x, r_s, oracle_resolution(scene.dim)).map(|m| m.point.distance(x))
}

/// Dense distance from `x` to the reflecting boundary.
pub fn dense_reflecting_distance(scene: &Scene, x: &[f64], cap: f64) -> Option<f64> {
    let f = &scene.reflecting.as_ref()?.field;
    closest_point(f, x, &IntervalBox::cube(x, cap), oracle_resolution(scene.dim)).map(|m| m.value)
}
