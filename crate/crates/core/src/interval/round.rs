//! Directed rounding emulated with error-free transformations.
//!
//! Each `*_down` / `*_up` pair returns the round-to-nearest result when it is
//! exact and steps one ulp outward otherwise, so the pair brackets the real
//! result without touching the FPU rounding mode.

#[inline]
fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

/// Exact `a * b - p` where `p = fl(a * b)`.
///
/// Uses a fused multiply-add when the target has one and Dekker's product
/// otherwise, falling back to the (slow, library) fused operation for
/// operands whose split could overflow or lose bits to underflow.
#[inline]
fn prod_err(a: f64, b: f64, p: f64) -> f64 {
    #[cfg(target_feature = "fma")]
    {
        a.mul_add(b, -p)
    }
    #[cfg(not(target_feature = "fma"))]
    {
        const BIG: f64 = 1e290;
        const SMALL: f64 = 1e-290;
        let (aa, ab, ap) = (a.abs(), b.abs(), p.abs());
        if !(SMALL..=BIG).contains(&aa) || !(SMALL..=BIG).contains(&ab) || !(SMALL..=BIG).contains(&ap) {
            return a.mul_add(b, -p);
        }
        let (ah, al) = split(a);
        let (bh, bl) = split(b);
        ((ah * bh - p) + ah * bl + al * bh) + al * bl
    }
}

#[cfg(not(target_feature = "fma"))]
#[inline]
fn split(a: f64) -> (f64, f64) {
    const FACTOR: f64 = 134_217_729.0; // 2^27 + 1
    let c = FACTOR * a;
    let h = c - (c - a);
    (h, a - h)
}

/// Sign-exact `a - q * b` for `q` close to `a / b` (so `fl(q b)` is within a
/// factor two of `a` and the first subtraction is exact).
#[inline]
fn residual(a: f64, q: f64, b: f64) -> f64 {
    let p = q * b;
    if !p.is_finite() {
        return (-q).mul_add(b, a);
    }
    (a - p) - prod_err(q, b, p)
}

#[inline]
pub(crate) fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        if s == f64::INFINITY && a.is_finite() && b.is_finite() {
            return f64::MAX;
        }
        return s;
    }
    if two_sum_err(a, b, s) < 0.0 {
        s.next_down()
    } else {
        s
    }
}

#[inline]
pub(crate) fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        if s == f64::NEG_INFINITY && a.is_finite() && b.is_finite() {
            return f64::MIN;
        }
        return s;
    }
    if two_sum_err(a, b, s) > 0.0 {
        s.next_up()
    } else {
        s
    }
}

#[inline]
pub(crate) fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

#[inline]
pub(crate) fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

/// Number of significant bits in the significand of `x`.
#[inline]
fn significant_bits(x: f64) -> u32 {
    let bits = x.to_bits();
    let mut m = bits & ((1u64 << 52) - 1);
    if (bits >> 52) & 0x7ff != 0 {
        m |= 1u64 << 52;
    }
    64 - m.leading_zeros() - m.trailing_zeros()
}

/// Cheap sufficient test that a normal product is exact: the significands
/// fit together in 53 bits.
#[inline]
fn exact_product(a: f64, b: f64) -> bool {
    significant_bits(a) + significant_bits(b) <= 53
}

/// Whether `fl(a * b) = p` is at most the exact product. Without a fused
/// multiply-add an exact error is too slow for the inner loop, so only
/// provably exact products keep `p` and the rest step outward.
#[inline]
fn product_not_above(a: f64, b: f64, p: f64) -> bool {
    if cfg!(target_feature = "fma") {
        prod_err(a, b, p) >= 0.0
    } else {
        exact_product(a, b)
    }
}

#[inline]
fn product_not_below(a: f64, b: f64, p: f64) -> bool {
    if cfg!(target_feature = "fma") {
        prod_err(a, b, p) <= 0.0
    } else {
        exact_product(a, b)
    }
}

/// Product with the interval-arithmetic convention `0 * inf = 0`.
#[inline]
fn mul_raw(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

#[inline]
pub(crate) fn mul_down(a: f64, b: f64) -> f64 {
    let p = mul_raw(a, b);
    if p == 0.0 {
        // Underflow of a nonzero product.
        if a != 0.0 && b != 0.0 && (a < 0.0) != (b < 0.0) {
            return -f64::from_bits(1);
        }
        return 0.0;
    }
    if !p.is_finite() {
        if a.is_finite() && b.is_finite() && p == f64::INFINITY {
            return f64::MAX;
        }
        return p;
    }
    if p.abs() < f64::MIN_POSITIVE {
        return p.next_down();
    }
    if product_not_above(a, b, p) {
        p
    } else {
        p.next_down()
    }
}

#[inline]
pub(crate) fn mul_up(a: f64, b: f64) -> f64 {
    let p = mul_raw(a, b);
    if p == 0.0 {
        if a != 0.0 && b != 0.0 && (a < 0.0) == (b < 0.0) {
            return f64::from_bits(1);
        }
        return 0.0;
    }
    if !p.is_finite() {
        if a.is_finite() && b.is_finite() && p == f64::NEG_INFINITY {
            return f64::MIN;
        }
        return p;
    }
    if p.abs() < f64::MIN_POSITIVE {
        return p.next_up();
    }
    if product_not_below(a, b, p) {
        p
    } else {
        p.next_up()
    }
}

/// Quotient rounding for finite, nonzero divisors.
#[inline]
pub(crate) fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    if !q.is_finite() || q == 0.0 || !a.is_finite() || q.abs() < f64::MIN_POSITIVE {
        return if q.is_finite() { q.next_down() } else { q };
    }
    // a - q*b has the sign of (true - q) * b.
    let r = residual(a, q, b);
    let below = if b > 0.0 { r < 0.0 } else { r > 0.0 };
    if below {
        q.next_down()
    } else {
        q
    }
}

#[inline]
pub(crate) fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    if !q.is_finite() || q == 0.0 || !a.is_finite() || q.abs() < f64::MIN_POSITIVE {
        return if q.is_finite() { q.next_up() } else { q };
    }
    let r = residual(a, q, b);
    let above = if b > 0.0 { r > 0.0 } else { r < 0.0 };
    if above {
        q.next_up()
    } else {
        q
    }
}

#[inline]
pub(crate) fn sqrt_down(a: f64) -> f64 {
    if a <= 0.0 {
        return 0.0;
    }
    let s = a.sqrt();
    if !s.is_finite() {
        return s;
    }
    if residual(a, s, s) < 0.0 {
        s.next_down()
    } else {
        s
    }
}

#[inline]
pub(crate) fn sqrt_up(a: f64) -> f64 {
    if a <= 0.0 {
        return 0.0;
    }
    let s = a.sqrt();
    if !s.is_finite() {
        return s;
    }
    if residual(a, s, s) > 0.0 {
        s.next_up()
    } else {
        s
    }
}

// libm exp/ln are faithfully rounded but not correctly rounded; one ulp of
// outward widening covers their error.

#[inline]
pub(crate) fn exp_down(a: f64) -> f64 {
    if a == 0.0 {
        return 1.0;
    }
    if a == f64::NEG_INFINITY {
        return 0.0;
    }
    let e = a.exp();
    if e.is_infinite() {
        return f64::MAX;
    }
    e.next_down().max(0.0)
}

#[inline]
pub(crate) fn exp_up(a: f64) -> f64 {
    if a == 0.0 {
        return 1.0;
    }
    if a == f64::NEG_INFINITY {
        return 0.0;
    }
    let e = a.exp();
    if e.is_infinite() {
        return e;
    }
    e.next_up()
}

#[inline]
pub(crate) fn ln_down(a: f64) -> f64 {
    if a == 1.0 {
        return 0.0;
    }
    if a <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let l = a.ln();
    if l.is_finite() {
        l.next_down()
    } else {
        l
    }
}

#[inline]
pub(crate) fn ln_up(a: f64) -> f64 {
    if a == 1.0 {
        return 0.0;
    }
    if a <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let l = a.ln();
    if l.is_finite() {
        l.next_up()
    } else {
        l
    }
}
