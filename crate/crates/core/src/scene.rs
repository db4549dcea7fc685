//! PDE boundary geometry and the scene description format.
//!
//! A scene file is line oriented; `#` starts a comment and a statement
//! continues onto following lines while parentheses are unbalanced.
//!
//! ```text
//! dimension 2                      # required, first statement
//! domain [-1.5, 1.5] [-1.5, 1.5]   # one [lo, hi] per axis
//! epsilon 1e-3                     # Dirichlet epsilon-shell
//! let blob = smin(circle(-0.3, 0, 0.4), circle(0.3, 0, 0.4), 0.2)
//! dirichlet inside circle(0, 0, 1) # the PDE domain lies inside (f < 0)
//! reflecting outside blob          # ... and outside (f > 0) this one
//! robin 1 + 0.5 * x                # Robin coefficient; omit for Neumann
//! dirichlet_value x                # boundary data g (default 0)
//! robin_value 0                    # Robin data h (default 0)
//! ```
//!
//! Expressions use `+ - * /`, integer powers `^n`, the coordinates `x y z`,
//! the constants `pi e`, names bound with `let`, and these functions:
//! `exp ln sqrt abs sqr min max norm dot`, `smin(a, b, k)` / `smax(a, b, k)`
//! (polynomial smooth min/max with blend radius `k`), and the primitives
//! `circle(cx, cy, r)`, `sphere(cx, cy, cz, r)`, `plane(n.., offset)`,
//! `torus(cx, cy, cz, R, r)`, `harmonic_rbf(bias, c.., w, ...)` and
//! `gaussian_rbf(sigma, bias, c.., w, ...)`.

use std::collections::HashMap;

use crate::field::{parse_expr, Expr, ImplicitField};
use crate::interval::{Interval, IntervalBox, Point};
use crate::surface::grid_crossings;

/// Which side of a boundary's zero set the PDE domain occupies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// The domain is where the field is negative.
    Inside,
    /// The domain is where the field is positive.
    Outside,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Boundary {
    pub field: ImplicitField,
    pub side: Side,
}

impl Boundary {
    /// Whether `p` is strictly on the domain side.
    pub fn admits(&self, p: &[f64]) -> bool {
        let v = self.field.eval_value(p);
        match self.side {
            Side::Inside => v < 0.0,
            Side::Outside => v > 0.0,
        }
    }

    /// Unit normal at `p` pointing into the domain.
    pub fn inward_normal(&self, p: &[f64]) -> Option<Point> {
        let n = self.field.gradient(p).normalized()?;
        Some(match self.side {
            Side::Inside => n.scale(-1.0),
            Side::Outside => n,
        })
    }
}

/// Robin coefficient field extended off the reflecting boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct RobinCoefficientField {
    pub field: ImplicitField,
    pub is_constant: bool,
}

impl RobinCoefficientField {
    pub fn new(field: ImplicitField) -> RobinCoefficientField {
        let is_constant = field.as_constant().is_some();
        RobinCoefficientField { field, is_constant }
    }

    /// Identically zero, i.e. a Neumann boundary.
    pub fn is_zero(&self) -> bool {
        self.field.as_constant() == Some(0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub dim: usize,
    pub dirichlet: Option<Boundary>,
    pub reflecting: Option<Boundary>,
    pub robin: Option<RobinCoefficientField>,
    pub dirichlet_data: ImplicitField,
    pub robin_data: ImplicitField,
    pub domain: IntervalBox,
    pub epsilon_shell: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SceneError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid scene: {0}")]
    Validation(String),
}

/// Surface samples drawn during validation.
pub const REGULARITY_SAMPLES: usize = 1000;
/// Smallest gradient norm accepted on a boundary zero set.
pub const MIN_GRADIENT: f64 = 1e-8;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub dirichlet_samples: usize,
    pub reflecting_samples: usize,
    pub min_gradient_norm: f64,
    pub min_robin_coefficient: Option<f64>,
}

impl Scene {
    /// Query tolerance: one tenth of the epsilon-shell.
    pub fn tolerance(&self) -> f64 {
        self.epsilon_shell / 10.0
    }

    /// Whether the reflecting boundary is Robin (μ̃ present and not ≡ 0).
    pub fn has_robin(&self) -> bool {
        self.reflecting.is_some() && self.robin.as_ref().is_some_and(|r| !r.is_zero())
    }

    /// Robin coefficient at a point; zero on Neumann boundaries.
    pub fn mu_at(&self, p: &[f64]) -> f64 {
        match &self.robin {
            Some(r) if !r.is_zero() => r.field.eval_value(p),
            _ => 0.0,
        }
    }

    /// Replaces μ̃ with a constant (0 gives a Neumann boundary).
    pub fn with_constant_mu(&self, mu: f64) -> Scene {
        let mut s = self.clone();
        s.robin = Some(RobinCoefficientField::new(ImplicitField::constant(mu, self.dim)));
        s
    }

    /// Inside test: in the domain box and strictly on the domain side of every
    /// present boundary.
    pub fn contains(&self, p: &[f64]) -> bool {
        self.domain.contains_point(p)
            && self.dirichlet.as_ref().is_none_or(|b| b.admits(p))
            && self.reflecting.as_ref().is_none_or(|b| b.admits(p))
    }

    /// Parses and fully validates a scene description.
    pub fn parse(text: &str) -> Result<Scene, SceneError> {
        let scene = parse_unvalidated(text)?;
        scene.validate()?;
        Ok(scene)
    }

    /// Checks the structural invariants, samples the regularity condition on
    /// each boundary, checks μ̃ > 0 on the reflecting boundary and keeps
    /// harmonic RBF poles out of the PDE domain.
    pub fn validate(&self) -> Result<ValidationReport, SceneError> {
        let fail = |m: String| Err(SceneError::Validation(m));
        if self.dirichlet.is_none() && self.reflecting.is_none() {
            return fail("at least one of 'dirichlet' or 'reflecting' is required".into());
        }
        if !(self.epsilon_shell > 0.0) {
            return fail("epsilon must be positive".into());
        }
        if self.domain.dim() != self.dim || self.domain.iter().any(|iv| !(iv.width() > 0.0)) {
            return fail("domain must have positive width in every dimension".into());
        }
        if self.robin.is_some() && self.reflecting.is_none() {
            return fail("'robin' requires a 'reflecting' boundary".into());
        }
        let mut report = ValidationReport { min_gradient_norm: f64::INFINITY, ..Default::default() };

        for (name, b) in [("dirichlet", &self.dirichlet), ("reflecting", &self.reflecting)] {
            let Some(b) = b else { continue };
            check_poles(name, &b.field, self)?;
            let pts = self.boundary_samples(&b.field, REGULARITY_SAMPLES);
            if pts.is_empty() {
                return fail(format!("{name} boundary has no zero crossing inside the domain box"));
            }
            for p in &pts {
                let g = b.field.gradient(p).norm();
                if !(g >= MIN_GRADIENT) {
                    return fail(format!("{name} boundary gradient vanishes near {p} (|grad f| = {g:e})"));
                }
                report.min_gradient_norm = report.min_gradient_norm.min(g);
            }
            if name == "dirichlet" {
                report.dirichlet_samples = pts.len();
                for p in &pts {
                    if !self.dirichlet_data.eval_value(p).is_finite() {
                        return fail(format!("dirichlet_value is not finite at {p}"));
                    }
                }
            } else {
                report.reflecting_samples = pts.len();
                if let Some(r) = &self.robin {
                    if let Some(c) = r.field.as_constant() {
                        if c < 0.0 || !c.is_finite() {
                            return fail(format!("robin coefficient must be positive, got {c}"));
                        }
                        report.min_robin_coefficient = Some(c);
                    } else {
                        let mut lo = f64::INFINITY;
                        for p in &pts {
                            let mu = r.field.eval_value(p);
                            if !(mu > 0.0) || !mu.is_finite() {
                                return fail(format!("robin coefficient must be positive on the boundary, got {mu} at {p}"));
                            }
                            lo = lo.min(mu);
                        }
                        report.min_robin_coefficient = Some(lo);
                    }
                }
            }
        }
        Ok(report)
    }

    /// Up to `max` points on the zero set of `f` inside the domain box, found
    /// from grid edge crossings.
    pub fn boundary_samples(&self, f: &ImplicitField, max: usize) -> Vec<Point> {
        let res = if self.dim == 2 { 128 } else { 32 };
        let pts = grid_crossings(|p| f.eval_value(p), &self.domain, res);
        if pts.len() <= max {
            return pts;
        }
        let step = pts.len() as f64 / max as f64;
        (0..max).map(|i| pts[(i as f64 * step) as usize]).collect()
    }
}

fn check_poles(name: &str, f: &ImplicitField, scene: &Scene) -> Result<(), SceneError> {
    let mut err = None;
    f.expr().visit(&mut |e| {
        if let Expr::Rbf(rbf) = e {
            if rbf.kernel != crate::field::RbfKernel::Harmonic {
                return;
            }
            for c in &rbf.centers {
                if pole_touches_domain(scene, c) && err.is_none() {
                    err = Some(format!(
                        "{name} field has a harmonic RBF pole at {:?} inside the PDE domain",
                        c
                    ));
                }
            }
        }
    });
    err.map_or(Ok(()), |m| Err(SceneError::Validation(m)))
}

/// The field is singular at the pole itself, so probe a tiny ring around it:
/// the pole touches the domain if any probe lies in it.
fn pole_touches_domain(scene: &Scene, c: &[f64]) -> bool {
    let d = scene.dim;
    if c.len() != d || !scene.domain.contains_point(c) {
        return false;
    }
    let h = 1e-6 * (1.0 + c.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    (0..d).flat_map(|k| [(k, h), (k, -h)]).any(|(k, s)| {
        let mut p = Point::new(c);
        p[k] += s;
        scene.contains(&p)
    })
}

/// Joins physical lines into statements, tracking the starting line number.
fn statements(text: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut start = 0;
    let mut depth: i32 = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if cur.is_empty() {
            if line.trim().is_empty() {
                continue;
            }
            start = i + 1;
        }
        cur.push(' ');
        cur.push_str(line.trim());
        depth += line.matches('(').count() as i32 - line.matches(')').count() as i32;
        if depth <= 0 {
            out.push((start, cur.trim().to_string()));
            cur.clear();
            depth = 0;
        }
    }
    if !cur.trim().is_empty() {
        out.push((start, cur.trim().to_string()));
    }
    out
}

fn parse_number(s: &str, line: usize) -> Result<f64, SceneError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| SceneError::Parse { line, message: format!("expected a number, got '{}'", s.trim()) })
}

/// Parses without running [`Scene::validate`].
pub fn parse_unvalidated(text: &str) -> Result<Scene, SceneError> {
    let mut dim: Option<usize> = None;
    let mut domain: Option<IntervalBox> = None;
    let mut epsilon: Option<f64> = None;
    let mut dirichlet = None;
    let mut reflecting = None;
    let mut robin = None;
    let mut dirichlet_data = None;
    let mut robin_data = None;
    let mut names: HashMap<String, Expr> = HashMap::new();

    for (line, stmt) in statements(text) {
        let perr = |message: String| SceneError::Parse { line, message };
        let (kw, rest) = stmt.split_once(char::is_whitespace).unwrap_or((stmt.as_str(), ""));
        let rest = rest.trim();
        if kw != "dimension" && dim.is_none() {
            return Err(perr("'dimension' must come first".into()));
        }
        let d = dim.unwrap_or(0);
        let field = |text: &str, names: &HashMap<String, Expr>| -> Result<ImplicitField, SceneError> {
            if text.is_empty() {
                return Err(perr(format!("'{kw}' needs an expression")));
            }
            parse_expr(text, d, names)
                .map(|e| ImplicitField::new(e, d))
                .map_err(|e| perr(e.to_string()))
        };
        let boundary = |rest: &str, names: &HashMap<String, Expr>| -> Result<Boundary, SceneError> {
            let (side, expr) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
            let side = match side {
                "inside" => Side::Inside,
                "outside" => Side::Outside,
                other => return Err(perr(format!("expected 'inside' or 'outside', got '{other}'"))),
            };
            Ok(Boundary { field: field(expr.trim(), names)?, side })
        };
        let once = |slot_filled: bool| {
            if slot_filled {
                Err(perr(format!("duplicate '{kw}' statement")))
            } else {
                Ok(())
            }
        };
        match kw {
            "dimension" => {
                once(dim.is_some())?;
                match rest {
                    "2" => dim = Some(2),
                    "3" => dim = Some(3),
                    _ => return Err(perr(format!("dimension must be 2 or 3, got '{rest}'"))),
                }
            }
            "domain" => {
                once(domain.is_some())?;
                let cleaned = rest.replace(['[', ']', ','], " ");
                let nums: Vec<f64> =
                    cleaned.split_whitespace().map(|s| parse_number(s, line)).collect::<Result<_, _>>()?;
                if nums.len() != 2 * d {
                    return Err(perr(format!("domain needs {} bounds for a {d}-d scene, got {}", 2 * d, nums.len())));
                }
                let mut ivs = Vec::new();
                for c in nums.chunks(2) {
                    ivs.push(Interval::try_new(c[0], c[1]).ok_or_else(|| perr(format!("inverted domain bounds [{}, {}]", c[0], c[1])))?);
                }
                domain = Some(IntervalBox::new(&ivs));
            }
            "epsilon" => {
                once(epsilon.is_some())?;
                epsilon = Some(parse_number(rest, line)?);
            }
            "let" => {
                let (name, expr) = rest
                    .split_once('=')
                    .ok_or_else(|| perr("expected 'let name = expression'".into()))?;
                let name = name.trim();
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(perr(format!("invalid name '{name}'")));
                }
                if matches!(name, "x" | "y" | "z" | "pi" | "e") {
                    return Err(perr(format!("'{name}' is reserved")));
                }
                let e = field(expr.trim(), &names)?;
                names.insert(name.to_string(), e.expr().clone());
            }
            "dirichlet" => {
                once(dirichlet.is_some())?;
                dirichlet = Some(boundary(rest, &names)?);
            }
            "reflecting" => {
                once(reflecting.is_some())?;
                reflecting = Some(boundary(rest, &names)?);
            }
            "robin" => {
                once(robin.is_some())?;
                robin = Some(RobinCoefficientField::new(field(rest, &names)?));
            }
            "dirichlet_value" => {
                once(dirichlet_data.is_some())?;
                dirichlet_data = Some(field(rest, &names)?);
            }
            "robin_value" => {
                once(robin_data.is_some())?;
                robin_data = Some(field(rest, &names)?);
            }
            other => return Err(perr(format!("unknown statement '{other}'"))),
        }
    }

    let dim = dim.ok_or_else(|| SceneError::Validation("missing 'dimension'".into()))?;
    let domain = domain.ok_or_else(|| SceneError::Validation("missing 'domain'".into()))?;
    let epsilon_shell = epsilon.ok_or_else(|| SceneError::Validation("missing 'epsilon'".into()))?;
    Ok(Scene {
        dim,
        dirichlet,
        reflecting,
        robin,
        dirichlet_data: dirichlet_data.unwrap_or_else(|| ImplicitField::constant(0.0, dim)),
        robin_data: robin_data.unwrap_or_else(|| ImplicitField::constant(0.0, dim)),
        domain,
        epsilon_shell,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const DISK: &str = "
        # unit disk
        dimension 2
        domain [-1.5, 1.5] [-1.5, 1.5]
        epsilon 1e-3
        dirichlet inside circle(0, 0, 1)
        dirichlet_value x
    ";

    #[test]
    fn parses_disk() {
        let s = Scene::parse(DISK).unwrap();
        assert_eq!(s.dim, 2);
        assert!((s.tolerance() - 1e-4).abs() < 1e-18);
        assert!(s.contains(&[0.3, 0.4]));
        assert!(!s.contains(&[1.2, 0.0]));
        assert_eq!(s.dirichlet_data.eval_value(&[0.25, 0.0]), 0.25);
    }

    #[test]
    fn teaser_style_scene() {
        let text = "
            dimension 3
            domain [-2, 2] [-2, 2] [-2, 2]
            epsilon 1e-3
            let blobs = smin(sphere(-0.4, 0, 0, 0.5),
                             sphere(0.4, 0, 0, 0.5), 0.2)
            dirichlet inside sphere(0, 0, 0, 1.8)
            reflecting outside blobs
            robin 1
        ";
        let s = Scene::parse(text).unwrap();
        assert_eq!(s.dim, 3);
        assert!(s.has_robin());
        assert!(s.robin.as_ref().unwrap().is_constant);
        assert!(s.contains(&[0.0, 1.0, 0.0]));
        assert!(!s.contains(&[0.4, 0.0, 0.0]));
    }

    #[test]
    fn rejects_missing_boundaries() {
        let text = "dimension 2\ndomain [-1,1] [-1,1]\nepsilon 1e-3\n";
        assert!(matches!(Scene::parse(text), Err(SceneError::Validation(_))));
    }

    #[test]
    fn rejects_negative_robin() {
        let text = "dimension 2\ndomain [-2,2] [-2,2]\nepsilon 1e-3\nreflecting inside circle(0,0,1)\nrobin -1\n";
        assert!(matches!(Scene::parse(text), Err(SceneError::Validation(_))));
        let text = "dimension 2\ndomain [-2,2] [-2,2]\nepsilon 1e-3\nreflecting inside circle(0,0,1)\nrobin x\n";
        assert!(matches!(Scene::parse(text), Err(SceneError::Validation(_))));
    }

    #[test]
    fn parse_errors_report_lines() {
        let text = "dimension 2\ndomain [-1,1] [-1,1]\nepsilon 1e-3\ndirichlet inside blob(1)\n";
        match Scene::parse(text) {
            Err(SceneError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        let text = "dimension 2\ndomain [-1,1] [-1,1]\nepsilon 1e-3\ndirichlet inside sphere(0,0,0,1)\n";
        assert!(matches!(Scene::parse(text), Err(SceneError::Parse { line: 4, .. })));
        assert!(matches!(Scene::parse("domain [0,1]"), Err(SceneError::Parse { line: 1, .. })));
        let text = "dimension 2\ndomain [-1,1] [-1,1]\ndirichlet inside circle(0,0,0.5)\n";
        assert!(matches!(Scene::parse(text), Err(SceneError::Validation(_))));
    }

    #[test]
    fn pole_inside_domain_is_rejected() {
        let text = "dimension 3\ndomain [-2,2] [-2,2] [-2,2]\nepsilon 1e-3\n\
                    dirichlet inside sphere(0,0,0,1.5)\n\
                    reflecting outside 1 - harmonic_rbf(0, 0,0,0, 0.3)\n\
                    robin harmonic_rbf(0, 1,0,0, 1)\n";
        // μ̃'s pole at (1,0,0) is in the domain, but only boundary fields are
        // checked for poles; μ̃ itself must then be positive on the surface.
        let s = parse_unvalidated(text).unwrap();
        assert!(s.validate().is_ok());
        let text = "dimension 3\ndomain [-2,2] [-2,2] [-2,2]\nepsilon 1e-3\n\
                    dirichlet inside sphere(0,0,0,1.5)\n\
                    reflecting outside 1 - harmonic_rbf(0, 1,0,0, 0.3, 0,0,0, 0.3)\n";
        let s = parse_unvalidated(text).unwrap();
        // Both poles are enclosed by the reflecting surface, outside the domain.
        assert!(s.validate().is_ok());
        let text = "dimension 2\ndomain [-2,2] [-2,2]\nepsilon 1e-3\n\
                    dirichlet inside circle(0,0,1.5) + 0 * harmonic_rbf(0, 0.5,0.5, 1)\n";
        assert!(matches!(Scene::parse(text), Err(SceneError::Validation(_))));
    }

    #[test]
    fn deterministic_parse() {
        assert_eq!(Scene::parse(DISK).unwrap(), Scene::parse(DISK).unwrap());
    }
}
