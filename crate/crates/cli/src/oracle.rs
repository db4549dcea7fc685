use std::fmt::Write as _;

use anyhow::{ensure, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use wost_implicit::oracle::{self, DenseMin};
use wost_implicit::query::sample_gamma;
use wost_implicit::{ImplicitField, IntervalBox, Point, Scene};

use crate::args::{self, OracleArgs, OracleKind, Which};
use crate::output::{fmt_point, Run};
use crate::Status;

/// Smallest accepted number of base grid nodes.
pub const MIN_DENSITY: usize = 1000;

pub fn run(a: &OracleArgs, argv: &[String]) -> Result<Status> {
    ensure!(a.density >= MIN_DENSITY, "--density must be at least {MIN_DENSITY}");
    let scene = a.common.scene()?;
    let x = args::point(&a.point, "--point", scene.dim)?;
    if let Some(r) = a.radius {
        ensure!(r.is_finite() && r > 0.0, "--radius must be positive");
    }
    let res = resolution(a.density, scene.dim);
    let mut run = Run::start(&a.common)?;
    let mut text = String::new();
    writeln!(text, "kind: {}", kind_name(a.kind))?;
    writeln!(text, "point: {}", fmt_point(&x))?;
    writeln!(text, "resolution: {res}")?;
    match a.kind {
        OracleKind::Cpq => {
            let (b, which) = args::boundary(&scene, a.boundary, Which::Dirichlet)?;
            let region = a.radius.map_or(scene.domain, |r| IntervalBox::cube(&x, r));
            let m = oracle::closest_point(&b.field, &x, &region, res);
            writeln!(text, "boundary: {}", args::name(which))?;
            writeln!(text, "R_D: {}", m.map_or(f64::INFINITY, |m| m.value))?;
            writeln!(text, "closest: {}", fmt_min(m))?;
        }
        OracleKind::Silhouette => {
            let (b, which) = args::boundary(&scene, a.boundary, Which::Reflecting)?;
            let cap = cap(&scene, a, which, &x, res);
            let m = oracle::silhouette(&b.field, &x, cap, res);
            writeln!(text, "boundary: {}", args::name(which))?;
            writeln!(text, "cap: {cap}")?;
            writeln!(text, "R_S: {}", m.map_or(cap, |m| m.value.min(cap)))?;
            writeln!(text, "witness: {}", fmt_min(m))?;
        }
        OracleKind::RobinRadius => {
            let refl = scene.reflecting.as_ref().context("robin-radius needs a reflecting boundary")?;
            let mu = args::robin_field(&scene).context("the scene has no Robin coefficient; pass --mu")?;
            let cap = cap(&scene, a, Which::Reflecting, &x, res);
            let r_s = oracle::silhouette(&refl.field, &x, cap, res).map_or(cap, |m| m.value.min(cap));
            let m = oracle::robin_radius(&refl.field, mu, &x, r_s, res);
            writeln!(text, "R_S: {r_s}")?;
            writeln!(text, "R_R: {}", m.map_or(r_s, |m| m.value.min(r_s)))?;
            writeln!(text, "witness: {}", fmt_min(m))?;
            writeln!(text, "unbounded: {}", m.is_none())?;
        }
        OracleKind::GammaMembership => {
            let (b, which) = args::boundary(&scene, a.boundary, Which::Reflecting)?;
            let radius = a.radius.context("gamma-membership needs --radius")?;
            writeln!(text, "boundary: {}", args::name(which))?;
            gamma_membership(&scene, &b.field, &x, radius, a, &mut text)?;
        }
    }
    print!("{text}");
    run.write("oracle.txt", text.as_bytes())?;
    let params = json!({
        "kind": kind_name(a.kind),
        "point": x,
        "radius": a.radius,
        "boundary": a.boundary.map(args::name),
        "density": a.density,
        "resolution": res,
        "mu": a.common.mu,
    });
    run.finish("oracle", &a.common, argv, params, None)?;
    Ok(Status::Ok)
}

/// Grid nodes per axis for a base grid of about `density` nodes.
fn resolution(density: usize, dim: usize) -> usize {
    let d = density as f64;
    (if dim == 2 { d.sqrt() } else { d.cbrt() }).round() as usize
}

fn kind_name(k: OracleKind) -> &'static str {
    match k {
        OracleKind::Cpq => "cpq",
        OracleKind::Silhouette => "silhouette",
        OracleKind::RobinRadius => "robin-radius",
        OracleKind::GammaMembership => "gamma-membership",
    }
}

fn fmt_min(m: Option<DenseMin>) -> String {
    m.map_or_else(|| "none".to_string(), |m| fmt_point(&m.point))
}

/// Same default as the silhouette query, with the Dirichlet distance taken
/// from the dense closest point.
fn cap(scene: &Scene, a: &OracleArgs, which: Which, x: &[f64], res: usize) -> f64 {
    if let Some(r) = a.radius {
        return r;
    }
    if let (Which::Reflecting, Some(d)) = (which, scene.dirichlet.as_ref()) {
        if let Some(m) = oracle::closest_point(&d.field, x, &scene.domain, res) {
            return m.value;
        }
    }
    args::farthest_corner(&scene.domain, x)
}

/// Checks that every boundary sample lies on the zero set inside the ball,
/// using pointwise values and central-difference gradients only.
fn gamma_membership(scene: &Scene, f: &ImplicitField, x: &[f64], radius: f64, a: &OracleArgs, text: &mut String) -> Result<()> {
    let cfg = a.common.query_config(scene)?;
    let dense = oracle::ball_surface_samples(f, x, radius, a.density);
    let mut rng = ChaCha8Rng::seed_from_u64(a.common.seed);
    let g = sample_gamma(f, x, radius, 100, &mut rng, &cfg);
    let slack = 10.0 * cfg.tol;
    let off_surface = |p: &Point| {
        let grad = oracle::fd_gradient(f, p, 1e-6).norm();
        f.eval_value(p).abs() / grad.max(f64::MIN_POSITIVE)
    };
    let members = g.samples.iter().filter(|s| off_surface(&s.point) <= slack && s.point.distance(x) <= radius + slack).count();
    let worst = g.samples.iter().map(|s| off_surface(&s.point)).fold(0.0, f64::max);
    writeln!(text, "radius: {radius}")?;
    writeln!(text, "dense_surface_samples: {}", dense.len())?;
    writeln!(text, "gamma_samples: {}", g.samples.len())?;
    writeln!(text, "members: {members}")?;
    writeln!(text, "largest_surface_distance: {worst:e}")?;
    writeln!(text, "all_members: {}", members == g.samples.len() && (g.samples.is_empty() == dense.is_empty()))?;
    Ok(())
}
