//! Shared corpus access for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use wost_implicit::Scene;

pub mod checks;
pub mod problems;

pub fn scene_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenes").join(format!("{name}.scene"))
}

pub fn load(name: &str) -> Scene {
    let text = std::fs::read_to_string(scene_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    Scene::parse(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Every corpus scene with query points inside its domain.
pub const CORPUS: &[(&str, &[&[f64]])] = &[
    ("disk", &[&[0.3, 0.4], &[-0.6, 0.1]]),
    ("neumann_annulus", &[&[0.7, 0.0], &[0.0, -0.6]]),
    ("annulus_robin", &[&[0.75, 0.0], &[0.3, 0.6], &[-0.55, 0.1]]),
    ("circle_robin", &[&[0.0, 0.0], &[0.3, 0.2], &[-0.5, 0.4]]),
    ("blobs_robin", &[&[0.0, 0.5], &[0.0, -0.2], &[0.9, 0.6], &[-0.2, 0.8]]),
    ("cassini_rbf", &[&[0.0, 0.5], &[1.0, 0.2], &[-0.3, -0.6]]),
    ("sphere_robin", &[&[0.0, 0.0, 0.0], &[0.2, 0.1, -0.3]]),
    ("teaser", &[&[0.0, 0.0, 0.9], &[0.8, 0.5, 0.0], &[0.0, -0.6, 0.3]]),
    ("rbf3d", &[&[0.0, 0.0, 0.7], &[0.9, 0.3, 0.2]]),
    ("torus", &[&[0.1, 0.0, 0.4], &[0.8, 0.0, 0.6], &[1.3, 0.3, 0.0]]),
];

/// Corpus scenes with a Robin boundary.
pub fn robin_corpus() -> impl Iterator<Item = (&'static str, Scene, &'static [&'static [f64]])> {
    CORPUS.iter().map(|(n, p)| (*n, load(n), *p)).filter(|(_, s, _)| s.has_robin())
}

/// Search radius of the silhouette query at `x`: the Dirichlet distance, or
/// the farthest domain corner when there is no Dirichlet boundary.
pub fn silhouette_cap(scene: &Scene, x: &[f64], r_d: f64) -> f64 {
    if r_d.is_finite() {
        return r_d;
    }
    scene
        .domain
        .iter()
        .zip(x)
        .map(|(iv, &c)| (iv.lo() - c).abs().max((iv.hi() - c).abs()).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Dense oracle resolution per dimension.
pub fn oracle_resolution(dim: usize) -> usize {
    if dim == 2 {
        400
    } else {
        120
    }
}

/// Every field in the corpus (boundaries, Robin coefficients and boundary
/// data) with the domain of its scene.
pub fn corpus_fields() -> Vec<(String, wost_implicit::ImplicitField, wost_implicit::IntervalBox)> {
    let mut out = Vec::new();
    for (name, _) in CORPUS {
        let s = load(name);
        let mut push = |what: &str, f: &wost_implicit::ImplicitField| out.push((format!("{name}/{what}"), f.clone(), s.domain));
        if let Some(b) = &s.dirichlet {
            push("dirichlet", &b.field);
        }
        if let Some(b) = &s.reflecting {
            push("reflecting", &b.field);
        }
        if let Some(m) = &s.robin {
            push("robin", &m.field);
        }
        push("dirichlet_value", &s.dirichlet_data);
        push("robin_value", &s.robin_data);
    }
    out
}
