//! Three-valued constraint tests built from inclusion intervals.

use crate::interval::{Interval, IntervalBox, ThreeValued};

/// `f = 0` given an enclosure of `f` over a box. Only a degenerate `[0, 0]`
/// enclosure certifies the equality.
pub fn eq_zero(f: Interval) -> ThreeValued {
    if f.is_empty() || !f.contains_zero() {
        ThreeValued::Negative
    } else if f.lo() == 0.0 && f.hi() == 0.0 {
        ThreeValued::Positive
    } else {
        ThreeValued::Unknown
    }
}

/// `f ≤ 0`
pub fn nonpositive(f: Interval) -> ThreeValued {
    if f.is_empty() || f.lo() > 0.0 {
        ThreeValued::Negative
    } else if f.hi() <= 0.0 {
        ThreeValued::Positive
    } else {
        ThreeValued::Unknown
    }
}

/// `f ≥ 0`
pub fn nonnegative(f: Interval) -> ThreeValued {
    nonpositive(-f)
}

/// `‖z − center‖ ≤ radius` for every / no `z` in the box.
pub fn ball(b: &IntervalBox, center: &[f64], radius: f64) -> ThreeValued {
    let n = Interval::norm_from(b, center);
    if n.is_empty() || n.lo() > radius {
        ThreeValued::Negative
    } else if n.hi() <= radius {
        ThreeValued::Positive
    } else {
        ThreeValued::Unknown
    }
}

/// Sign condition on the directional quantity `g · (z − x)`; `sign > 0`
/// requires it non-negative, `sign < 0` non-positive.
pub fn halfspace_dot(g_dot: Interval, sign: f64) -> ThreeValued {
    if sign >= 0.0 {
        nonnegative(g_dot)
    } else {
        nonpositive(g_dot)
    }
}

/// Three-valued conjunction: negative if any is negative, positive if all
/// are positive.
pub fn conj(parts: impl IntoIterator<Item = ThreeValued>) -> ThreeValued {
    let mut acc = ThreeValued::Positive;
    for p in parts {
        acc = acc.and(p);
        if acc == ThreeValued::Negative {
            break;
        }
    }
    acc
}
