//! Brute-force reference answers by dense sampling.
//!
//! Nothing here uses interval arithmetic or the branch-and-bound drivers:
//! fields are evaluated pointwise, gradients come from central differences
//! and surface points from sign changes along dense families of lines. The
//! answers are approximate but independent of the code they check.

use crate::field::ImplicitField;
use crate::interval::{IntervalBox, Point};

/// Central-difference gradient with step `h`.
pub fn fd_gradient(f: &ImplicitField, p: &[f64], h: f64) -> Point {
    let mut g = Point::zeros(p.len());
    let mut q = Point::new(p);
    for k in 0..p.len() {
        let c = q[k];
        q[k] = c + h;
        let a = f.eval_value(&q);
        q[k] = c - h;
        let b = f.eval_value(&q);
        q[k] = c;
        g[k] = (a - b) / (2.0 * h);
    }
    g
}

fn fd_step(p: &[f64]) -> f64 {
    1e-7 * (1.0 + p.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

fn bisect(f: &ImplicitField, a: &Point, b: &Point, fa: f64) -> Point {
    let (mut lo, mut hi) = (*a, *b);
    for _ in 0..80 {
        let mid = lo.offset(&hi.sub(&lo), 0.5);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f.eval_value(&mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (fa < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if f.eval_value(&lo).abs() <= f.eval_value(&hi).abs() {
        lo
    } else {
        hi
    }
}

/// Zero crossings of `f` along axis-parallel lines through `region`.
///
/// For each axis, `lines` evenly spaced lines per transverse axis run along
/// it, each sampled at `samples + 1` points; every sign change is bisected
/// to floating-point resolution. With `lines == samples` this is the set of
/// crossings on the edges of a regular grid.
pub fn surface_points(f: &ImplicitField, region: &IntervalBox, lines: usize, samples: usize) -> Vec<Point> {
    let d = region.dim();
    let lines = lines.max(1);
    let samples = samples.max(1);
    let mut out = Vec::new();
    for axis in 0..d {
        let others: Vec<usize> = (0..d).filter(|&k| k != axis).collect();
        let count = lines.pow(others.len() as u32);
        let step = region[axis].width() / samples as f64;
        for line in 0..count {
            let mut p = Point::zeros(d);
            let mut rem = line;
            for &k in &others {
                let i = rem % lines;
                rem /= lines;
                let iv = region[k];
                p[k] = iv.lo() + (i as f64 + 0.5) * iv.width() / lines as f64;
            }
            p[axis] = region[axis].lo();
            let mut prev = p;
            let mut fp = f.eval_value(&prev);
            for j in 1..=samples {
                let mut q = p;
                q[axis] = region[axis].lo() + j as f64 * step;
                let fq = f.eval_value(&q);
                if fp.is_finite() && fq.is_finite() {
                    if fp == 0.0 {
                        out.push(prev);
                    } else if fq != 0.0 && (fp < 0.0) != (fq < 0.0) {
                        out.push(bisect(f, &prev, &q, fp));
                    }
                }
                prev = q;
                fp = fq;
            }
        }
    }
    out
}

/// A sampled minimum and where it was found.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DenseMin {
    pub value: f64,
    pub point: Point,
}

/// Minimizes `score` over surface samples of `region`, then repeatedly
/// resamples small neighbourhoods of the best few candidates ten times more
/// finely. `score` returns `None` for excluded samples.
fn refined_min(
    f: &ImplicitField,
    region: &IntervalBox,
    resolution: usize,
    levels: usize,
    score: &dyn Fn(&Point) -> Option<f64>,
) -> Option<DenseMin> {
    const KEEP: usize = 6;
    let mut h = region.iter().map(|iv| iv.width()).fold(0.0, f64::max) / resolution as f64;
    let mut cands: Vec<DenseMin> = best_distinct(
        surface_points(f, region, resolution, resolution)
            .into_iter()
            .filter_map(|p| score(&p).map(|value| DenseMin { value, point: p })),
        KEEP,
        4.0 * h,
    );
    let mut best = cands.first().copied();
    for _ in 0..levels {
        let coarse = h;
        h /= 10.0;
        let mut next = Vec::new();
        for c in &cands {
            let local = IntervalBox::cube(&c.point, 3.0 * coarse).intersect(region);
            if local.is_empty() {
                continue;
            }
            let n = (local.width() / h).ceil() as usize;
            next.extend(
                surface_points(f, &local, n, n)
                    .into_iter()
                    .filter_map(|p| score(&p).map(|value| DenseMin { value, point: p })),
            );
        }
        next.extend(cands.iter().copied());
        cands = best_distinct(next.into_iter(), KEEP, 4.0 * h);
        if let Some(b) = cands.first() {
            if best.is_none_or(|o| b.value < o.value) {
                best = Some(*b);
            }
        }
    }
    best
}

/// The `keep` smallest values whose points are at least `sep` apart.
fn best_distinct(it: impl Iterator<Item = DenseMin>, keep: usize, sep: f64) -> Vec<DenseMin> {
    let mut all: Vec<DenseMin> = it.filter(|c| !c.value.is_nan()).collect();
    all.sort_by(|a, b| a.value.total_cmp(&b.value));
    let mut out: Vec<DenseMin> = Vec::new();
    for c in all {
        if out.len() == keep {
            break;
        }
        if out.iter().all(|o| o.point.distance(&c.point) >= sep) {
            out.push(c);
        }
    }
    out
}

/// Distance from `x` to the zero set of `f` inside `region`.
pub fn closest_point(f: &ImplicitField, x: &[f64], region: &IntervalBox, resolution: usize) -> Option<DenseMin> {
    refined_min(f, region, resolution, 3, &|p| Some(p.distance(x)))
}

/// First parameter `t ∈ (0, t_max]` with `f(x + t v) = 0`, found by marching
/// with the given step and bisecting the first sign change.
pub fn ray_march(f: &ImplicitField, x: &[f64], v: &[f64], t_max: f64, step: f64) -> Option<f64> {
    let at = |t: f64| Point::new(x).offset(v, t);
    let n = (t_max / step).ceil() as usize;
    let mut t0 = 0.0;
    let mut f0 = f.eval_value(&at(0.0));
    for i in 1..=n {
        let t1 = (i as f64 * step).min(t_max);
        let f1 = f.eval_value(&at(t1));
        if f1 == 0.0 {
            return Some(t1);
        }
        if f0 != 0.0 && (f0 < 0.0) != (f1 < 0.0) {
            let (mut lo, mut hi) = (t0, t1);
            for _ in 0..80 {
                let m = 0.5 * (lo + hi);
                if m <= lo || m >= hi {
                    break;
                }
                let fm = f.eval_value(&at(m));
                if (fm < 0.0) == (f0 < 0.0) {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        t0 = t1;
        f0 = f1;
    }
    None
}

/// Signed viewing cosine `∇f(z)·(z − x) / (‖∇f(z)‖ ‖z − x‖)`.
pub fn view_cosine(f: &ImplicitField, x: &[f64], z: &[f64]) -> f64 {
    let g = fd_gradient(f, z, fd_step(z));
    let d = Point::new(z).sub(x);
    g.dot(&d) / (g.norm() * d.norm())
}

/// Nearest silhouette point of the zero set of `f` as seen from `x`, within
/// distance `cap`.
///
/// The closest surface samples whose viewing cosine is near zero seed local
/// searches. Each search resamples a shrinking neighbourhood, moving to the
/// closest sample whose cosine is well within the tolerance for the
/// spacing, or to the smallest cosine if none is. Seeds whose cosine does not shrink
/// with the spacing are discarded; the answer is the smallest distance among
/// the rest.
pub fn silhouette(f: &ImplicitField, x: &[f64], cap: f64, resolution: usize) -> Option<DenseMin> {
    const LEVELS: usize = 7;
    const MOVES: usize = 6;
    let region = IntervalBox::cube(x, cap);
    let mut h = 2.0 * cap / resolution as f64;
    // The cosine changes by about (1/r + curvature) per unit length.
    let threshold = |r: f64, h: f64| 3.0 * h * (1.0 / r + 10.0);
    let cos_at = |p: &Point| {
        let r = p.distance(x);
        (r > 0.0 && r <= cap).then(|| view_cosine(f, x, p).abs())
    };
    // Seeds carry the distance as their value.
    let mut seeds: Vec<(DenseMin, f64)> = best_distinct(
        surface_points(f, &region, resolution, resolution).into_iter().filter_map(|p| {
            let c = cos_at(&p)?;
            let r = p.distance(x);
            (c <= threshold(r, h).min(0.5)).then_some(DenseMin { value: r, point: p })
        }),
        64,
        4.0 * h,
    )
    .into_iter()
    .map(|s| (s, cos_at(&s.point).unwrap_or(f64::INFINITY)))
    .collect();
    for _ in 0..LEVELS {
        let coarse = h;
        h /= 4.0;
        for (s, c) in seeds.iter_mut() {
            for _ in 0..MOVES {
                let local = IntervalBox::cube(&s.point, 2.0 * coarse).intersect(&region);
                let n = (local.width() / h).ceil() as usize;
                let mut on: Option<(DenseMin, f64)> = None;
                let mut flat: Option<(DenseMin, f64)> = None;
                for p in surface_points(f, &local, n, n) {
                    let Some(cp) = cos_at(&p) else { continue };
                    let r = p.distance(x);
                    let cand = (DenseMin { value: r, point: p }, cp);
                    // A narrow band keeps the point within reach of the
                    // next, finer level.
                    if cp <= 0.25 * threshold(r, h) {
                        if on.as_ref().is_none_or(|o| r < o.0.value) {
                            on = Some(cand);
                        }
                    } else if flat.as_ref().is_none_or(|o| cp < o.1) {
                        flat = Some(cand);
                    }
                }
                let prev = s.point;
                match (on, flat) {
                    (Some(o), _) => (*s, *c) = o,
                    (None, Some(fl)) if fl.1 < *c => (*s, *c) = fl,
                    _ => {}
                }
                if s.point.distance(&prev) < coarse {
                    break;
                }
            }
        }
    }
    seeds
        .into_iter()
        .filter(|(s, c)| *c <= threshold(s.value, h))
        .map(|(s, _)| s)
        .min_by(|a, b| a.value.total_cmp(&b.value))
}

/// The Robin radius objective: `r exp(cos / (μ r))` in 2D and
/// `r / (1 − cos / (μ r))` in 3D, infinite where the denominator is not
/// positive.
pub fn robin_objective(dim: usize, r: f64, cos: f64, mu: f64) -> f64 {
    let c = cos.clamp(0.0, 1.0);
    if dim == 2 {
        r * (c / (mu * r)).exp()
    } else {
        let den = 1.0 - c / (mu * r);
        if den > 0.0 {
            r / den
        } else {
            f64::INFINITY
        }
    }
}

/// Robin reflectance for a boundary point at distance `r` and viewing cosine
/// `cos` inside a ball of radius `radius`.
pub fn reflectance(dim: usize, mu: f64, r: f64, radius: f64, cos: f64) -> f64 {
    let g = if dim == 2 { r * (radius / r).ln() } else { r * (1.0 - r / radius) };
    1.0 - mu * g / cos
}

/// Dense minimum of the Robin objective over boundary points within `r_s`.
/// `None` when no sample is finite.
pub fn robin_radius(f: &ImplicitField, mu: &ImplicitField, x: &[f64], r_s: f64, resolution: usize) -> Option<DenseMin> {
    let region = IntervalBox::cube(x, r_s);
    let dim = x.len();
    let score = |p: &Point| {
        let r = p.distance(x);
        if r > r_s || r == 0.0 {
            return None;
        }
        let c = view_cosine(f, x, p).abs();
        let v = robin_objective(dim, r, c, mu.eval_value(p));
        v.is_finite().then_some(v)
    };
    refined_min(f, &region, resolution, 3, &score)
}

/// At least `n` points of the zero set of `f` within distance `radius` of
/// `x` (fewer only if the set is tiny), evenly thinned to about `n`.
pub fn ball_surface_samples(f: &ImplicitField, x: &[f64], radius: f64, n: usize) -> Vec<Point> {
    let region = IntervalBox::cube(x, radius);
    let d = x.len();
    let mut lines = if d == 2 { 1024 } else { 64 };
    loop {
        let pts: Vec<Point> =
            surface_points(f, &region, lines, 256).into_iter().filter(|p| p.distance(x) <= radius).collect();
        let cap = if d == 2 { 1 << 20 } else { 1 << 10 };
        if pts.len() >= n || lines >= cap || pts.is_empty() {
            if pts.len() <= n {
                return pts;
            }
            let step = pts.len() as f64 / n as f64;
            return (0..n).map(|i| pts[(i as f64 * step) as usize]).collect();
        }
        lines *= 2;
    }
}

/// Points of the regular grid with spacing at most `step` over `region`.
pub fn grid_nodes(region: &IntervalBox, step: f64) -> impl Iterator<Item = Point> + '_ {
    let d = region.dim();
    let counts: Vec<usize> = region.iter().map(|iv| (iv.width() / step).ceil().max(1.0) as usize).collect();
    let total: usize = counts.iter().map(|c| c + 1).product();
    (0..total).map(move |lin| {
        let mut p = Point::zeros(d);
        let mut rem = lin;
        for k in 0..d {
            let i = rem % (counts[k] + 1);
            rem /= counts[k] + 1;
            p[k] = region[k].lo() + i as f64 * region[k].width() / counts[k] as f64;
        }
        p
    })
}
