use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, ValueEnum};
use wost_implicit::query::QueryConfig;
use wost_implicit::{Boundary, ImplicitField, IntervalBox, Scene};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum QueryKind {
    Cpq,
    Ray,
    Silhouette,
    RobinRadius,
    SampleGamma,
    Star,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleKind {
    Cpq,
    Silhouette,
    RobinRadius,
    GammaMembership,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Dirichlet,
    Reflecting,
}

/// Flags shared by every subcommand that reads a scene.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Scene file.
    #[arg(long)]
    pub scene: PathBuf,
    /// Replace the Robin coefficient with this constant (0 for Neumann).
    #[arg(long)]
    pub mu: Option<f64>,
    /// Query tolerance instead of one tenth of the scene's epsilon.
    #[arg(long = "tol-override")]
    pub tol_override: Option<f64>,
    /// Random seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for result files and the run manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct QueryArgs {
    pub kind: QueryKind,
    #[command(flatten)]
    pub common: Common,
    /// Query point, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub point: String,
    /// Ray direction, comma separated (ray queries).
    #[arg(long, allow_hyphen_values = true)]
    pub dir: Option<String>,
    /// Search radius: ray length, sampling ball or silhouette cap.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Boundary to query; defaults to the Dirichlet boundary for closest
    /// points and to the reflecting boundary otherwise.
    #[arg(long, value_enum)]
    pub boundary: Option<Which>,
    /// Number of boundary samples (sample-gamma).
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Write every explored, pruned and accepted box to this CSV file.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    /// Grid node counts per axis, e.g. 64x64 or 32,32,16.
    #[arg(long)]
    pub grid: String,
    /// Grid bounds x0,x1,y0,y1[,z0,z1]; defaults to the scene domain.
    #[arg(long, allow_hyphen_values = true)]
    pub region: Option<String>,
    /// Walks per grid node.
    #[arg(long, default_value_t = 1000)]
    pub walks: usize,
    /// Step limit per walk.
    #[arg(long, default_value_t = 10_000)]
    pub max_steps: usize,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    pub kind: OracleKind,
    #[command(flatten)]
    pub common: Common,
    #[arg(long, allow_hyphen_values = true)]
    pub point: String,
    /// Search radius; defaults as for the matching query.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, value_enum)]
    pub boundary: Option<Which>,
    /// Nodes of the base sampling grid (at least 1000).
    #[arg(long, default_value_t = 160_000)]
    pub density: usize,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long)]
    pub scene: PathBuf,
}

/// Reads, parses and validates a scene file.
pub fn load_scene(path: &Path) -> Result<Scene> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Scene::parse(&text).with_context(|| format!("in {}", path.display()))
}

impl Common {
    /// The scene with the coefficient override applied.
    pub fn scene(&self) -> Result<Scene> {
        let s = load_scene(&self.scene)?;
        Ok(match self.mu {
            Some(m) => {
                ensure!(m.is_finite() && m >= 0.0, "--mu must be a finite non-negative number");
                ensure!(s.reflecting.is_some(), "--mu needs a reflecting boundary");
                s.with_constant_mu(m)
            }
            None => s,
        })
    }

    pub fn query_config(&self, scene: &Scene) -> Result<QueryConfig> {
        let cfg = QueryConfig::for_scene(scene);
        Ok(match self.tol_override {
            Some(t) => {
                ensure!(t.is_finite() && t > 0.0, "--tol-override must be positive");
                cfg.with_tol(t)
            }
            None => cfg,
        })
    }
}

/// Parses a comma-separated list of numbers.
pub fn numbers(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            let v: f64 = t.trim().parse().with_context(|| format!("{what}: '{t}' is not a number"))?;
            ensure!(v.is_finite(), "{what}: values must be finite");
            Ok(v)
        })
        .collect()
}

/// A point of the scene's dimension.
pub fn point(text: &str, what: &str, dim: usize) -> Result<Vec<f64>> {
    let p = numbers(text, what)?;
    ensure!(p.len() == dim, "{what} has {} coordinates, the scene is {dim}-dimensional", p.len());
    Ok(p)
}

/// The requested boundary, or the default for the query.
pub fn boundary(scene: &Scene, which: Option<Which>, prefer: Which) -> Result<(&Boundary, Which)> {
    let pick = |w: Which| match w {
        Which::Dirichlet => scene.dirichlet.as_ref(),
        Which::Reflecting => scene.reflecting.as_ref(),
    };
    match which {
        Some(w) => pick(w).map(|b| (b, w)).with_context(|| format!("the scene has no {} boundary", name(w))),
        None => {
            let other = if prefer == Which::Dirichlet { Which::Reflecting } else { Which::Dirichlet };
            match (pick(prefer), pick(other)) {
                (Some(b), _) => Ok((b, prefer)),
                (None, Some(b)) => Ok((b, other)),
                (None, None) => bail!("the scene has no boundary"),
            }
        }
    }
}

pub fn name(w: Which) -> &'static str {
    match w {
        Which::Dirichlet => "dirichlet",
        Which::Reflecting => "reflecting",
    }
}

/// Distance from `x` to the farthest corner of the scene domain.
pub fn farthest_corner(domain: &IntervalBox, x: &[f64]) -> f64 {
    domain
        .iter()
        .zip(x)
        .map(|(iv, &c)| (iv.lo() - c).abs().max((iv.hi() - c).abs()).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Robin coefficient field of the scene, if it has a Robin boundary.
pub fn robin_field(scene: &Scene) -> Option<&ImplicitField> {
    scene.robin.as_ref().filter(|_| scene.has_robin()).map(|r| &r.field)
}
