//! Locating points on zero sets: Newton projection, bisection, and grid
//! crossing enumeration.

use crate::field::ImplicitField;
use crate::interval::{IntervalBox, Point};

/// A point on a zero set with its local frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceSample {
    pub position: Point,
    pub field_value: f64,
    pub gradient: Point,
    pub unit_normal: Point,
}

impl SurfaceSample {
    /// `None` where the gradient vanishes.
    pub fn at(f: &ImplicitField, p: &[f64]) -> Option<SurfaceSample> {
        let (v, g) = f.value_and_gradient(p);
        let n = g.normalized()?;
        Some(SurfaceSample { position: Point::new(p), field_value: v, gradient: g, unit_normal: n })
    }
}

/// Bisects `f` along the segment `a`–`b`, whose endpoint values must differ
/// in sign. Runs to floating-point resolution.
pub fn bisect_segment(f: impl Fn(&[f64]) -> f64, a: &Point, b: &Point) -> Point {
    let fa = f(a);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let at = |t: f64| a.offset(&b.sub(a), t);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(&at(mid));
        if fm == 0.0 {
            return at(mid);
        }
        if (fm < 0.0) == (fa < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (pl, ph) = (at(lo), at(hi));
    if f(&pl).abs() <= f(&ph).abs() {
        pl
    } else {
        ph
    }
}

/// Newton iteration `p ← p − f ∇f / ‖∇f‖²` with the step length capped at
/// `max_step`. Returns the final point and its field value.
pub fn newton_project(
    value: impl Fn(&[f64]) -> f64,
    gradient: impl Fn(&[f64]) -> Point,
    seed: &Point,
    max_step: f64,
    max_iter: usize,
    abs_tol: f64,
) -> (Point, f64) {
    let mut p = *seed;
    let mut v = value(&p);
    for _ in 0..max_iter {
        if v.abs() <= abs_tol || !v.is_finite() {
            break;
        }
        let g = gradient(&p);
        let g2 = g.dot(&g);
        if !(g2 > 0.0) || !g2.is_finite() {
            break;
        }
        let mut step = -v / g2;
        let len = step.abs() * g2.sqrt();
        if len > max_step {
            step *= max_step / len;
        }
        let mut q = p.offset(&g, step);
        let mut vq = value(&q);
        // Damping: halve until |f| decreases.
        let mut tries = 0;
        while !(vq.abs() < v.abs()) && tries < 30 {
            step *= 0.5;
            q = p.offset(&g, step);
            vq = value(&q);
            tries += 1;
        }
        if !(vq.abs() < v.abs()) {
            break;
        }
        p = q;
        v = vq;
    }
    (p, v)
}

/// Projects a seed onto the zero set of `f`: damped Newton first, then
/// bisection along the gradient line if Newton stalls and a sign change is
/// found within `reach` of the seed.
pub fn project_to_surface(f: &ImplicitField, seed: &Point, reach: f64, abs_tol: f64) -> Option<Point> {
    let (p, v) = newton_project(
        |q| f.eval_value(q),
        |q| f.gradient(q),
        seed,
        reach.max(f64::MIN_POSITIVE),
        20,
        abs_tol,
    );
    if v.abs() <= abs_tol {
        return Some(p);
    }
    let n = f.gradient(seed).normalized()?;
    let v0 = f.eval_value(seed);
    // Walk against the sign of f along the gradient line.
    let dir = if v0 > 0.0 { -1.0 } else { 1.0 };
    let mut s = reach / 64.0;
    while s <= reach * (1.0 + 1e-12) {
        let q = seed.offset(&n, dir * s);
        let vq = f.eval_value(&q);
        if (vq <= 0.0) != (v0 <= 0.0) {
            let r = bisect_segment(|x| f.eval_value(x), seed, &q);
            let (r, vr) = newton_project(|x| f.eval_value(x), |x| f.gradient(x), &r, reach, 5, abs_tol);
            return (vr.abs() <= abs_tol.max(1e-9)).then_some(r);
        }
        s *= 2.0;
    }
    None
}

/// Min-norm Gauss–Newton projection onto the common zero set of two scalar
/// functions. `grad_a` is the gradient of `a`; the gradient of `b` is taken by
/// central differences. Returns the point once both residuals are within
/// `abs_tol`.
pub fn project_to_pair(
    a: impl Fn(&[f64]) -> f64,
    grad_a: impl Fn(&[f64]) -> Point,
    b: impl Fn(&[f64]) -> f64,
    seed: &Point,
    max_iter: usize,
    abs_tol: f64,
) -> Option<Point> {
    let d = seed.dim();
    let mut p = *seed;
    for _ in 0..max_iter {
        let (fa, fb) = (a(&p), b(&p));
        if !fa.is_finite() || !fb.is_finite() {
            return None;
        }
        if fa.abs() <= abs_tol && fb.abs() <= abs_tol {
            return Some(p);
        }
        let ga = grad_a(&p);
        let h = 1e-6 * (1.0 + p.norm());
        let mut gb = Point::zeros(d);
        for k in 0..d {
            let (mut lo, mut hi) = (p, p);
            lo[k] -= h;
            hi[k] += h;
            gb[k] = (b(&hi) - b(&lo)) / (2.0 * h);
        }
        // Solve (J Jᵀ) λ = F, step = −Jᵀ λ.
        let (m11, m12, m22) = (ga.dot(&ga), ga.dot(&gb), gb.dot(&gb));
        let det = m11 * m22 - m12 * m12;
        if !(det.abs() > 1e-300) {
            return None;
        }
        let l1 = (m22 * fa - m12 * fb) / det;
        let l2 = (m11 * fb - m12 * fa) / det;
        let step = ga.scale(-l1).offset(&gb, -l2);
        p = p.offset(&step, 1.0);
    }
    let (fa, fb) = (a(&p), b(&p));
    (fa.abs() <= abs_tol && fb.abs() <= abs_tol).then_some(p)
}

/// Enumerates zero crossings of `value` along the edges of a regular grid
/// with `resolution` cells per axis over `region`. Each crossing is located
/// by bisection, so it lies on the zero set to floating-point accuracy.
pub fn grid_crossings(value: impl Fn(&[f64]) -> f64, region: &IntervalBox, resolution: usize) -> Vec<Point> {
    let d = region.dim();
    let n = resolution.max(1);
    let h: Vec<f64> = region.iter().map(|iv| iv.width() / n as f64).collect();
    let node = |idx: &[usize]| {
        let mut p = Point::zeros(d);
        for k in 0..d {
            p[k] = region[k].lo() + idx[k] as f64 * h[k];
        }
        p
    };
    let stride: Vec<usize> = (0..d).map(|k| (n + 1).pow(k as u32)).collect();
    let total = (n + 1).pow(d as u32);
    let mut vals = Vec::with_capacity(total);
    let mut idx = vec![0usize; d];
    for lin in 0..total {
        for k in 0..d {
            idx[k] = (lin / stride[k]) % (n + 1);
        }
        vals.push(value(&node(&idx)));
    }
    let mut out = Vec::new();
    for lin in 0..total {
        for k in 0..d {
            idx[k] = (lin / stride[k]) % (n + 1);
        }
        let va = vals[lin];
        if !va.is_finite() {
            continue;
        }
        for axis in 0..d {
            if idx[axis] == n {
                continue;
            }
            let vb = vals[lin + stride[axis]];
            if !vb.is_finite() {
                continue;
            }
            if va == 0.0 {
                if axis == 0 {
                    out.push(node(&idx));
                }
                continue;
            }
            if (va < 0.0) != (vb < 0.0) && vb != 0.0 {
                let a = node(&idx);
                let mut j = idx.clone();
                j[axis] += 1;
                let b = node(&j);
                out.push(bisect_segment(&value, &a, &b));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_crossings_lie_on_circle() {
        let f = ImplicitField::parse("circle(0, 0, 1)", 2).unwrap();
        let b = IntervalBox::cube(&[0.0, 0.0], 1.5);
        let pts = grid_crossings(|p| f.eval_value(p), &b, 64);
        assert!(pts.len() > 100);
        for p in &pts {
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn silhouette_projection() {
        let f = ImplicitField::parse("circle(0, 0, 1)", 2).unwrap();
        let x = Point::new(&[2.0, 0.0]);
        let psi = |z: &[f64]| f.gradient(z).dot(&Point::new(z).sub(&x));
        let p = project_to_pair(|z| f.eval_value(z), |z| f.gradient(z), psi, &Point::new(&[0.6, 0.7]), 50, 1e-12)
            .unwrap();
        assert!((p[0] - 0.5).abs() < 1e-9 && (p[1] - 0.75f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn projection_reaches_sphere() {
        let f = ImplicitField::parse("sphere(0, 0, 0, 1)", 3).unwrap();
        let p = project_to_surface(&f, &Point::new(&[0.3, 0.4, 0.5]), 1.0, 1e-12).unwrap();
        assert!(f.eval_value(&p).abs() <= 1e-12);
        let s = SurfaceSample::at(&f, &p).unwrap();
        assert!((s.unit_normal.norm() - 1.0).abs() < 1e-12);
    }
}
