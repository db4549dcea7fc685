use rand::seq::index;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::{QueryConfig, Tracer};
use crate::field::ImplicitField;
use crate::interval::{IntervalBox, Point, ThreeValued};
use crate::opt::{ball, conj, eq_zero, solve_streaming, Acceptance, Options, Stats};
use crate::surface::project_to_surface;

#[derive(Clone, Debug, PartialEq)]
pub struct GammaSample {
    pub point: Point,
    /// Density with respect to surface measure.
    pub pdf_estimate: f64,
    pub source_box: IntervalBox,
}

#[derive(Clone, Debug)]
pub struct GammaResult {
    pub samples: Vec<GammaSample>,
    /// Estimated measure of the boundary inside the ball.
    pub total_measure: f64,
    /// Boxes that crossed the surface and contributed weight.
    pub boxes_used: usize,
    pub stats: Stats,
    pub converged: bool,
}

/// Draws `n` points on `{f = 0} ∩ B(x, radius)`, approximately uniform in
/// surface measure.
///
/// A constraint-satisfaction pass streams fine boxes covering the set. Each
/// box that shows a sign change at its corners is weighted by
/// `vol / Σ |n_i| w_i`, the area a plane with unit normal `n` cuts from a
/// box with widths `w` on average over offsets, and boxes are drawn by
/// weighted reservoir sampling with replacement. Drawn boxes contribute the
/// projection of their midpoint onto the surface.
pub fn sample_gamma<R: Rng + ?Sized>(
    f: &ImplicitField,
    x: &[f64],
    radius: f64,
    n: usize,
    rng: &mut R,
    cfg: &QueryConfig,
) -> GammaResult {
    sample_gamma_traced(f, x, radius, n, rng, cfg, &mut Tracer::none())
}

pub fn sample_gamma_traced<R: Rng + ?Sized>(
    f: &ImplicitField,
    x: &[f64],
    radius: f64,
    n: usize,
    rng: &mut R,
    cfg: &QueryConfig,
    tr: &mut Tracer,
) -> GammaResult {
    let con = |b: &IntervalBox| {
        let bl = ball(b, x, radius);
        if bl == ThreeValued::Negative {
            return bl;
        }
        conj([bl, eq_zero(f.eval_interval(b))])
    };
    let mut slots: Vec<Option<(Point, IntervalBox)>> = vec![None; n];
    let mut total = 0.0;
    let mut used = 0usize;
    let opts = Options { budget: cfg.budget, ..Options::default() };
    let search = IntervalBox::cube(x, radius);
    let (stats, converged) = solve_streaming(
        &con,
        Acceptance::new(cfg.gamma_tol),
        &search,
        &opts,
        &mut |e, b| tr.emit(e, b),
        &mut |b, _| {
            if !crosses(f, b) {
                return true;
            }
            let mid = b.midpoint();
            let Some(p) = project_to_surface(f, &mid, 2.0 * b.width(), 1e-13) else {
                return true;
            };
            if p.distance(x) > radius + cfg.tol {
                return true;
            }
            let Some(nrm) = f.gradient(&p).normalized() else {
                return true;
            };
            let extent: f64 = nrm.iter().zip(b.iter()).map(|(ni, iv)| ni.abs() * iv.width()).sum();
            let w = b.volume() / extent;
            if !(w > 0.0 && w.is_finite()) {
                return true;
            }
            used += 1;
            total += w;
            if n > 0 {
                let k = Binomial::new(n as u64, (w / total).min(1.0)).map_or(0, |d| d.sample(rng)) as usize;
                for slot in index::sample(rng, n, k.min(n)) {
                    slots[slot] = Some((p, *b));
                }
            }
            true
        },
    );
    let pdf = if total > 0.0 { 1.0 / total } else { 0.0 };
    let samples = slots
        .into_iter()
        .flatten()
        .map(|(point, source_box)| GammaSample { point, pdf_estimate: pdf, source_box })
        .collect();
    GammaResult { samples, total_measure: total, boxes_used: used, stats, converged }
}

/// Whether the field changes sign (or vanishes) at the corners of `b`.
fn crosses(f: &ImplicitField, b: &IntervalBox) -> bool {
    let d = b.dim();
    let mut pos = false;
    let mut neg = false;
    let mut c = Point::zeros(d);
    for mask in 0..(1usize << d) {
        for k in 0..d {
            c[k] = if mask >> k & 1 == 1 { b[k].hi() } else { b[k].lo() };
        }
        let v = f.eval_value(&c);
        if v == 0.0 {
            return true;
        }
        pos |= v > 0.0;
        neg |= v < 0.0;
    }
    pos && neg
}
