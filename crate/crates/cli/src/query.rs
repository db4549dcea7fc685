use std::fmt::Write as _;

use anyhow::{bail, ensure, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use wost_implicit::opt::Stats;
use wost_implicit::query::{cpq_traced, cspq_traced, ray_intersect_traced, rrbq_traced, sample_gamma_traced, star_radius_traced, QueryConfig, Tracer};
use wost_implicit::{IntervalBox, Point, Scene};

use crate::args::{self, QueryArgs, QueryKind, Which};
use crate::output::{fmt_point, stats_lines, Run, TraceWriter};
use crate::Status;

pub fn run(a: &QueryArgs, argv: &[String]) -> Result<Status> {
    let scene = a.common.scene()?;
    let cfg = a.common.query_config(&scene)?;
    let x = args::point(&a.point, "--point", scene.dim)?;
    if let Some(r) = a.radius {
        ensure!(r.is_finite() && r > 0.0, "--radius must be positive");
    }
    let mut run = Run::start(&a.common)?;
    let mut writer = a.trace.as_ref().map(|p| TraceWriter::create(p, scene.dim)).transpose()?;
    let mut sink = |e, b: &IntervalBox| {
        if let Some(w) = writer.as_mut() {
            w.event(e, b);
        }
    };
    let mut tr = Tracer::new(&mut sink);

    let mut text = String::new();
    writeln!(text, "kind: {}", kind_name(a.kind))?;
    writeln!(text, "point: {}", fmt_point(&x))?;
    let (stats, converged) = match a.kind {
        QueryKind::Cpq => closest(&scene, a, &x, &cfg, &mut tr, &mut text)?,
        QueryKind::Ray => ray(&scene, a, &x, &cfg, &mut tr, &mut text)?,
        QueryKind::Silhouette => silhouette(&scene, a, &x, &cfg, &mut tr, &mut text)?,
        QueryKind::RobinRadius => robin(&scene, a, &x, &cfg, &mut tr, &mut text)?,
        QueryKind::SampleGamma => gamma(&scene, a, &x, &cfg, &mut tr, &mut text, &mut run)?,
        QueryKind::Star => star(&scene, &x, &cfg, &mut tr, &mut text)?,
    };
    writeln!(text, "converged: {converged}")?;
    text.push_str(&stats_lines(&stats));
    if let (Some(w), Some(path)) = (writer.take(), a.trace.as_ref()) {
        let counts = w.finish()?;
        let total = counts.boxes_explored + counts.boxes_pruned_constraint + counts.boxes_pruned_bound + counts.boxes_accepted;
        writeln!(text, "trace: {} ({total} boxes)", path.display())?;
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        run.record(path.clone(), &bytes);
    }
    print!("{text}");
    run.write("query.txt", text.as_bytes())?;
    let params = json!({
        "kind": kind_name(a.kind),
        "point": x,
        "dir": a.dir,
        "radius": a.radius,
        "boundary": a.boundary.map(args::name),
        "samples": a.samples,
        "mu": a.common.mu,
        "tol": cfg.tol,
        "budget": cfg.budget,
        "shrink": cfg.shrink,
    });
    run.finish("query", &a.common, argv, params, None)?;
    Ok(if converged { Status::Ok } else { Status::NonConverged })
}

fn kind_name(k: QueryKind) -> &'static str {
    match k {
        QueryKind::Cpq => "cpq",
        QueryKind::Ray => "ray",
        QueryKind::Silhouette => "silhouette",
        QueryKind::RobinRadius => "robin-radius",
        QueryKind::SampleGamma => "sample-gamma",
        QueryKind::Star => "star",
    }
}

fn fmt_opt(p: Option<&Point>) -> String {
    p.map_or_else(|| "none".to_string(), |p| fmt_point(p))
}

type Outcome = Result<(Stats, bool)>;

fn closest(scene: &Scene, a: &QueryArgs, x: &[f64], cfg: &QueryConfig, tr: &mut Tracer, text: &mut String) -> Outcome {
    let (b, which) = args::boundary(scene, a.boundary, Which::Dirichlet)?;
    let search = a.radius.map_or(scene.domain, |r| IntervalBox::cube(x, r));
    let c = cpq_traced(&b.field, x, &search, None, cfg, tr);
    writeln!(text, "boundary: {}", args::name(which))?;
    writeln!(text, "R_D: {}", c.r_d)?;
    writeln!(text, "closest: {}", fmt_opt(c.closest.as_ref()))?;
    writeln!(text, "absent: {}", c.absent)?;
    Ok((c.stats, c.converged))
}

fn ray(scene: &Scene, a: &QueryArgs, x: &[f64], cfg: &QueryConfig, tr: &mut Tracer, text: &mut String) -> Outcome {
    let dir = args::point(a.dir.as_deref().context("ray queries need --dir")?, "--dir", scene.dim)?;
    let Some(v) = Point::new(&dir).normalized() else { bail!("--dir must be nonzero") };
    let (b, which) = args::boundary(scene, a.boundary, Which::Reflecting)?;
    let t_max = a.radius.unwrap_or_else(|| args::farthest_corner(&scene.domain, x));
    let r = ray_intersect_traced(&b.field, x, &v, t_max, false, cfg, tr);
    writeln!(text, "boundary: {}", args::name(which))?;
    writeln!(text, "direction: {}", fmt_point(&v))?;
    match r.hit {
        Some(h) => {
            writeln!(text, "t: {}", h.t)?;
            writeln!(text, "hit: {}", fmt_point(&h.point))?;
            writeln!(text, "normal: {}", fmt_point(&h.normal))?;
            writeln!(text, "grazing: {}", h.grazing)?;
        }
        None => writeln!(text, "hit: none")?,
    }
    Ok((r.stats, r.converged))
}

/// Silhouette search radius: `--radius`, else the Dirichlet distance when
/// querying the reflecting boundary, else the farthest domain corner.
fn silhouette_cap(scene: &Scene, a: &QueryArgs, which: Which, x: &[f64], cfg: &QueryConfig, tr: &mut Tracer, stats: &mut Stats) -> f64 {
    if let Some(r) = a.radius {
        return r;
    }
    if let (Which::Reflecting, Some(d)) = (which, scene.dirichlet.as_ref()) {
        let c = cpq_traced(&d.field, x, &scene.domain, None, cfg, tr);
        add(stats, &c.stats);
        if c.r_d.lo().is_finite() {
            return c.r_d.lo();
        }
    }
    args::farthest_corner(&scene.domain, x)
}

fn add(a: &mut Stats, b: &Stats) {
    a.boxes_explored += b.boxes_explored;
    a.boxes_pruned_constraint += b.boxes_pruned_constraint;
    a.boxes_pruned_bound += b.boxes_pruned_bound;
    a.boxes_accepted += b.boxes_accepted;
}

fn silhouette(scene: &Scene, a: &QueryArgs, x: &[f64], cfg: &QueryConfig, tr: &mut Tracer, text: &mut String) -> Outcome {
    let (b, which) = args::boundary(scene, a.boundary, Which::Reflecting)?;
    let mut stats = Stats::default();
    let cap = silhouette_cap(scene, a, which, x, cfg, tr, &mut stats);
    let s = cspq_traced(&b.field, x, cap, cfg, tr);
    add(&mut stats, &s.stats);
    writeln!(text, "boundary: {}", args::name(which))?;
    writeln!(text, "cap: {cap}")?;
    writeln!(text, "R_S: {}", s.r_s)?;
    writeln!(text, "R_S_unshrunk: {}", s.r_s_raw)?;
    writeln!(text, "shrink_factor: {}", s.shrink_factor)?;
    writeln!(text, "witness: {}", fmt_opt(s.witness.as_ref()))?;
    writeln!(text, "silhouette_found: {}", s.feasible)?;
    writeln!(text, "certified: {}", s.certified)?;
    writeln!(text, "halving_rounds: {}", s.rounds)?;
    Ok((stats, s.converged))
}

fn robin(scene: &Scene, a: &QueryArgs, x: &[f64], cfg: &QueryConfig, tr: &mut Tracer, text: &mut String) -> Outcome {
    let refl = scene.reflecting.as_ref().context("robin-radius needs a reflecting boundary")?;
    let mu = scene.robin.as_ref().filter(|_| scene.has_robin()).context("the scene has no Robin coefficient; pass --mu")?;
    let mut stats = Stats::default();
    let cap = silhouette_cap(scene, a, Which::Reflecting, x, cfg, tr, &mut stats);
    let s = cspq_traced(&refl.field, x, cap, cfg, tr);
    add(&mut stats, &s.stats);
    let r = rrbq_traced(&refl.field, mu, x, s.r_s, cfg, tr);
    add(&mut stats, &r.stats);
    writeln!(text, "R_S: {}", s.r_s)?;
    writeln!(text, "R_R: {}", r.r_r)?;
    writeln!(text, "objective_bound: {}", r.minimum_bound)?;
    writeln!(text, "witness: {}", fmt_opt(r.witness.as_ref()))?;
    writeln!(text, "unbounded: {}", r.unbounded)?;
    writeln!(text, "fallback: {}", r.fallback)?;
    Ok((stats, s.converged && r.converged))
}

fn gamma(scene: &Scene, a: &QueryArgs, x: &[f64], cfg: &QueryConfig, tr: &mut Tracer, text: &mut String, run: &mut Run) -> Outcome {
    let (b, which) = args::boundary(scene, a.boundary, Which::Reflecting)?;
    let radius = a.radius.context("sample-gamma needs --radius")?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.common.seed);
    let g = sample_gamma_traced(&b.field, x, radius, a.samples, &mut rng, cfg, tr);
    writeln!(text, "boundary: {}", args::name(which))?;
    writeln!(text, "radius: {radius}")?;
    writeln!(text, "measure: {}", g.total_measure)?;
    writeln!(text, "boxes_used: {}", g.boxes_used)?;
    writeln!(text, "samples: {}", g.samples.len())?;
    let axes = ["x", "y", "z"];
    let mut csv = axes[..scene.dim].join(",") + ",pdf\n";
    for s in &g.samples {
        let coords: Vec<String> = s.point.iter().map(|v| format!("{v:e}")).collect();
        writeln!(csv, "{},{:e}", coords.join(","), s.pdf_estimate)?;
    }
    if a.common.out.is_some() {
        run.write("samples.csv", csv.as_bytes())?;
    } else {
        text.push_str(&csv);
    }
    Ok((g.stats, g.converged))
}

fn star(scene: &Scene, x: &[f64], cfg: &QueryConfig, tr: &mut Tracer, text: &mut String) -> Outcome {
    let s = star_radius_traced(scene, x, None, cfg, tr);
    writeln!(text, "R_D: {}", s.r_d)?;
    writeln!(text, "closest_dirichlet: {}", fmt_opt(s.closest_dirichlet.as_ref()))?;
    writeln!(text, "R_S: {}", s.r_s)?;
    writeln!(text, "R_R: {}", s.r_r)?;
    writeln!(text, "dirichlet_absent: {}", s.flags.dirichlet_absent)?;
    writeln!(text, "reflecting_absent: {}", s.flags.reflecting_absent)?;
    writeln!(text, "robin_unbounded: {}", s.flags.rrbq_unbounded)?;
    writeln!(text, "certification_fallback: {}", s.flags.certification_fallback)?;
    Ok((s.stats, !s.flags.nonconverged))
}
