use std::fmt::Write as _;

use anyhow::{bail, ensure, Context, Result};
use serde_json::json;
use wost_implicit::wost::{estimate_indexed, EstimateStats, GridSpec, WalkConfig, WalkError};
use wost_implicit::{Point, Scene};

use crate::args::{self, SolveArgs};
use crate::output::{pgm, Run};
use crate::Status;

pub fn run(a: &SolveArgs, argv: &[String]) -> Result<Status> {
    let scene = a.common.scene()?;
    ensure!(scene.dirichlet.is_some(), "the scene has no Dirichlet boundary, so walks cannot terminate");
    ensure!(a.walks > 0, "--walks must be positive");
    ensure!(a.max_steps > 0, "--max-steps must be positive");
    let grid = grid_spec(&scene, &a.grid, a.region.as_deref())?;
    let mut cfg = WalkConfig::for_scene(&scene);
    cfg.n_walks = a.walks;
    cfg.seed = a.common.seed;
    cfg.max_steps = a.max_steps;
    if let Some(t) = a.common.tol_override {
        ensure!(t.is_finite() && t > 0.0, "--tol-override must be positive");
        cfg.query = cfg.query.with_tol(t);
    }

    let mut run = Run::start(&a.common)?;
    let points = grid.points();
    let mut estimates: Vec<Option<EstimateStats>> = Vec::with_capacity(points.len());
    let mut failed_nodes = 0;
    for (i, p) in points.iter().enumerate() {
        estimates.push(match estimate_indexed(&scene, p, i as u64, &cfg) {
            Ok(s) => Some(s),
            Err(WalkError::OutsideDomain(_)) => None,
            Err(WalkError::AllTruncated(_)) => {
                failed_nodes += 1;
                None
            }
            Err(e) => bail!(e),
        });
    }

    let csv = grid_csv(&points, &estimates, scene.dim);
    run.write("solution.csv", csv.as_bytes())?;
    let (width, height, values) = image_slice(&grid, &estimates);
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let range = (!finite.is_empty())
        .then(|| (finite.iter().copied().fold(f64::INFINITY, f64::min), finite.iter().copied().fold(f64::NEG_INFINITY, f64::max)));
    let (lo, hi) = range.unwrap_or((0.0, 0.0));
    run.write("solution.pgm", &pgm(width, height, &values, lo, hi))?;

    let inside: Vec<&EstimateStats> = estimates.iter().flatten().collect();
    let truncated: usize = inside.iter().map(|s| s.truncated_walks).sum::<usize>() + failed_nodes * a.walks;
    let clamps: usize = inside.iter().map(|s| s.rho_clamps).sum();
    let max_err = inside.iter().map(|s| s.std_error).fold(0.0, f64::max);
    let mut text = String::new();
    writeln!(text, "nodes: {}", points.len())?;
    writeln!(text, "estimated_nodes: {}", inside.len())?;
    writeln!(text, "walks_per_node: {}", a.walks)?;
    writeln!(text, "truncated_walks: {truncated}")?;
    writeln!(text, "reflectance_clamps: {clamps}")?;
    writeln!(text, "largest_std_error: {max_err:e}")?;
    match range {
        Some((lo, hi)) => writeln!(text, "image_min: {lo}\nimage_max: {hi}")?,
        None => writeln!(text, "image_min: none\nimage_max: none")?,
    }
    print!("{text}");
    run.write("summary.txt", text.as_bytes())?;
    let params = json!({
        "grid": grid.counts,
        "region_lo": grid.lo.to_vec(),
        "region_hi": grid.hi.to_vec(),
        "walks": a.walks,
        "max_steps": a.max_steps,
        "epsilon_shell": cfg.epsilon_shell,
        "r_min": cfg.r_min,
        "tol": cfg.query.tol,
        "mu": a.common.mu,
    });
    run.finish("solve", &a.common, argv, params, range)?;
    Ok(if truncated > 0 { Status::NonConverged } else { Status::Ok })
}

/// Parses `--grid` (`64x64` or `32,32,16`) and `--region`.
fn grid_spec(scene: &Scene, grid: &str, region: Option<&str>) -> Result<GridSpec> {
    let counts: Vec<usize> = grid
        .split(['x', ','])
        .map(|t| t.trim().parse::<usize>().with_context(|| format!("--grid: '{t}' is not a node count")))
        .collect::<Result<_>>()?;
    ensure!(counts.len() == scene.dim, "--grid has {} axes, the scene is {}-dimensional", counts.len(), scene.dim);
    ensure!(counts.iter().all(|&c| c > 0), "--grid counts must be positive");
    ensure!(counts.iter().product::<usize>() <= 1 << 24, "--grid has too many nodes");
    let (lo, hi) = match region {
        Some(r) => {
            let v = args::numbers(r, "--region")?;
            ensure!(v.len() == 2 * scene.dim, "--region needs {} numbers", 2 * scene.dim);
            let lo: Vec<f64> = v.iter().step_by(2).copied().collect();
            let hi: Vec<f64> = v.iter().skip(1).step_by(2).copied().collect();
            ensure!(lo.iter().zip(&hi).all(|(l, h)| l <= h), "--region bounds must be increasing");
            (Point::new(&lo), Point::new(&hi))
        }
        None => {
            let lo: Vec<f64> = scene.domain.iter().map(|iv| iv.lo()).collect();
            let hi: Vec<f64> = scene.domain.iter().map(|iv| iv.hi()).collect();
            (Point::new(&lo), Point::new(&hi))
        }
    };
    Ok(GridSpec { lo, hi, counts })
}

/// One row per node, x fastest; absent nodes have NaN estimates and zero
/// walks.
fn grid_csv(points: &[Point], estimates: &[Option<EstimateStats>], dim: usize) -> String {
    let axes = ["x", "y", "z"];
    let mut csv = axes[..dim].join(",") + ",estimate,std_error,n\n";
    for (p, e) in points.iter().zip(estimates) {
        for v in p.iter() {
            let _ = write!(csv, "{v},");
        }
        let _ = match e {
            Some(s) => writeln!(csv, "{},{},{}", s.mean, s.std_error, s.n_walks),
            None => writeln!(csv, "nan,nan,0"),
        };
    }
    csv
}

/// Estimates of the xy grid (the middle z layer in 3D), top row at the
/// largest y.
fn image_slice(grid: &GridSpec, estimates: &[Option<EstimateStats>]) -> (usize, usize, Vec<f64>) {
    let (nx, ny) = (grid.counts[0], grid.counts[1]);
    let layer = if grid.counts.len() == 3 { grid.counts[2] / 2 } else { 0 };
    let mut values = Vec::with_capacity(nx * ny);
    for j in (0..ny).rev() {
        for i in 0..nx {
            let idx = i + nx * (j + ny * layer);
            values.push(estimates[idx].map_or(f64::NAN, |s| s.mean));
        }
    }
    (nx, ny, values)
}
