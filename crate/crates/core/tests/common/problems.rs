//! Constrained minimization and constraint-satisfaction problems on corpus
//! fields, with dense brute-force references.

use std::collections::HashMap;

use wost_implicit::opt::{conj, eq_zero, minimize, nonpositive, solve, Acceptance, MinimizeResult, Options, SolveResult};
use wost_implicit::oracle::{grid_nodes, surface_points};
use wost_implicit::{ImplicitField, Interval, IntervalBox, Point, ThreeValued};

use super::load;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Feasible {
    /// The zero set of the field.
    Surface,
    /// The sublevel set `field ≤ 0`.
    Sublevel,
    /// The whole search box.
    Everywhere,
}

#[derive(Clone, Copy, Debug)]
pub struct ProblemSpec {
    pub name: &'static str,
    pub scene: &'static str,
    /// Use the Dirichlet field when true, the reflecting field otherwise.
    pub dirichlet: bool,
    pub objective: &'static str,
    pub feasible: Feasible,
}

pub const PROBLEMS: &[ProblemSpec] = &[
    ProblemSpec { name: "disk_linear", scene: "disk", dirichlet: true, objective: "x + 2 * y", feasible: Feasible::Surface },
    ProblemSpec {
        name: "annulus_far_point",
        scene: "annulus_robin",
        dirichlet: false,
        objective: "(x - 0.3)^2 + (y - 1)^2",
        feasible: Feasible::Surface,
    },
    ProblemSpec { name: "blobs_lowest", scene: "blobs_robin", dirichlet: false, objective: "y - 0.2 * x", feasible: Feasible::Surface },
    ProblemSpec {
        name: "cassini_distance",
        scene: "cassini_rbf",
        dirichlet: false,
        objective: "x^2 + (y - 0.5)^2",
        feasible: Feasible::Surface,
    },
    ProblemSpec { name: "cassini_product", scene: "cassini_rbf", dirichlet: false, objective: "x * y", feasible: Feasible::Surface },
    ProblemSpec {
        name: "blobs_sublevel",
        scene: "blobs_robin",
        dirichlet: false,
        objective: "x^2 + y + 0.3 * exp(-4 * (x - 0.3)^2)",
        feasible: Feasible::Sublevel,
    },
    ProblemSpec {
        name: "blobs_field",
        scene: "blobs_robin",
        dirichlet: false,
        objective: "smin(circle(-0.45, 0, 0.3), circle(0.45, 0, 0.3), 0.15) + 0.1 * x",
        feasible: Feasible::Everywhere,
    },
    ProblemSpec { name: "teaser_lowest", scene: "teaser", dirichlet: false, objective: "z + 0.1 * x", feasible: Feasible::Surface },
    ProblemSpec {
        name: "teaser_distance",
        scene: "teaser",
        dirichlet: false,
        objective: "(x - 0.8)^2 + (y - 0.5)^2 + z^2",
        feasible: Feasible::Surface,
    },
    ProblemSpec { name: "torus_diagonal", scene: "torus", dirichlet: false, objective: "x + y + z", feasible: Feasible::Surface },
    ProblemSpec {
        name: "rbf3d_distance",
        scene: "rbf3d",
        dirichlet: false,
        objective: "(x - 0.9)^2 + (y - 0.3)^2 + (z - 0.2)^2",
        feasible: Feasible::Surface,
    },
    ProblemSpec { name: "sphere_sublevel", scene: "sphere_robin", dirichlet: false, objective: "x * y * z", feasible: Feasible::Sublevel },
    ProblemSpec {
        name: "bowl_3d",
        scene: "torus",
        dirichlet: false,
        objective: "(x - 0.5)^2 + (y - 0.2)^2 + 0.5 * z^2 + 0.3 * exp(-8 * (x^2 + z^2))",
        feasible: Feasible::Everywhere,
    },
];

/// A problem ready to run.
pub struct Problem {
    pub spec: ProblemSpec,
    pub field: ImplicitField,
    pub objective: ImplicitField,
    pub region: IntervalBox,
}

impl Problem {
    pub fn new(spec: &ProblemSpec) -> Problem {
        let scene = load(spec.scene);
        let boundary = if spec.dirichlet { scene.dirichlet.as_ref() } else { scene.reflecting.as_ref() };
        let field = boundary.unwrap().field.clone();
        let objective = ImplicitField::parse(spec.objective, scene.dim).unwrap();
        // Every corpus boundary lies well inside this box.
        let half = if scene.dim == 2 { 1.5 } else { 1.25 };
        let region = IntervalBox::cube(&vec![0.0; scene.dim], half);
        Problem { spec: *spec, field, objective, region }
    }

    pub fn dim(&self) -> usize {
        self.region.dim()
    }

    /// Acceptance width of the interval minimizer.
    pub fn tol(&self) -> f64 {
        if self.dim() == 2 {
            1e-4
        } else {
            1e-3
        }
    }

    /// Allowed gap between the interval and brute-force minima.
    pub fn agreement(&self) -> f64 {
        if self.dim() == 2 {
            2e-3
        } else {
            5e-3
        }
    }

    pub fn constraint(&self, b: &IntervalBox) -> ThreeValued {
        match self.spec.feasible {
            Feasible::Surface => eq_zero(self.field.eval_interval(b)),
            Feasible::Sublevel => nonpositive(self.field.eval_interval(b)),
            Feasible::Everywhere => ThreeValued::Positive,
        }
    }

    pub fn minimize(&self) -> MinimizeResult {
        let obj = |b: &IntervalBox| self.objective.eval_interval(b);
        let con = |b: &IntervalBox| self.constraint(b);
        minimize(&obj, &con, Acceptance::new(self.tol()), &self.region, &Options::default())
    }

    /// Dense feasible samples: surface crossings, plus grid nodes for the
    /// sublevel and unconstrained problems.
    pub fn dense_points(&self) -> Vec<Point> {
        let (lines, samples, step) = if self.dim() == 2 { (1500, 1500, 2e-3) } else { (160, 160, 1e-2) };
        let mut pts = if self.spec.feasible == Feasible::Everywhere {
            Vec::new()
        } else {
            surface_points(&self.field, &self.region, lines, samples)
        };
        if self.spec.feasible != Feasible::Surface {
            pts.extend(grid_nodes(&self.region, step).filter(|p| {
                self.spec.feasible == Feasible::Everywhere || self.field.eval_value(p) <= 0.0
            }));
        }
        pts
    }

    /// Smallest objective value over the dense samples.
    pub fn brute_min(&self) -> (f64, Point) {
        self.dense_points()
            .into_iter()
            .map(|p| (self.objective.eval_value(&p), p))
            .filter(|(v, _)| v.is_finite())
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap()
    }

    /// Acceptance width used by the constraint-satisfaction check.
    pub fn solve_tol(&self) -> f64 {
        if self.dim() == 2 {
            2e-3
        } else {
            2e-2
        }
    }

    /// Covers the part of the surface where the objective is at most `level`.
    pub fn solve(&self, level: f64) -> SolveResult {
        let con = |b: &IntervalBox| conj([eq_zero(self.field.eval_interval(b)), nonpositive(self.objective.eval_interval(b) - Interval::point(level))]);
        solve(&con, Acceptance::new(self.solve_tol()), &self.region, &Options::default())
    }
}

/// Buckets boxes or points on a grid of cell size `cell` for neighbour
/// lookups.
pub struct SpatialHash {
    cell: f64,
    map: HashMap<Vec<i64>, Vec<usize>>,
}

impl SpatialHash {
    pub fn new(cell: f64, points: impl Iterator<Item = Point>) -> SpatialHash {
        let mut map: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, p) in points.enumerate() {
            map.entry(key(&p, cell)).or_default().push(i);
        }
        SpatialHash { cell, map }
    }

    /// Indices stored in the cells around `p`, `reach` cells in every
    /// direction.
    pub fn near(&self, p: &[f64], reach: i64) -> Vec<usize> {
        let k = key(p, self.cell);
        let mut out = Vec::new();
        let d = k.len();
        let span = (2 * reach + 1) as usize;
        for lin in 0..span.pow(d as u32) {
            let mut c = k.clone();
            let mut rem = lin;
            for ck in c.iter_mut() {
                *ck += (rem % span) as i64 - reach;
                rem /= span;
            }
            if let Some(v) = self.map.get(&c) {
                out.extend_from_slice(v);
            }
        }
        out
    }
}

fn key(p: &[f64], cell: f64) -> Vec<i64> {
    p.iter().map(|v| (v / cell).floor() as i64).collect()
}
