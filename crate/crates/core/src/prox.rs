//! Scalar proximal maps of `λ|x|^p`.

use alloc::format;

use crate::error::{Error, Result};

#[inline]
pub fn soft_threshold(v: f64, tau: f64) -> f64 {
    if v > tau {
        v - tau
    } else if v < -tau {
        v + tau
    } else {
        0.0
    }
}

/// `argmin_x ½(x − v)² + λ|x|^p` for `λ > 0` and `1 ≤ p ≤ 2`.
pub fn prox_lp_scalar(v: f64, lambda: f64, p: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Parameter(format!("prox weight must be positive, got {lambda}")));
    }
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::Parameter(format!("exponent must lie in [1, 2], got {p}")));
    }
    Ok(prox_power(v, lambda, p))
}

#[inline]
pub(crate) fn prox_power(v: f64, lambda: f64, p: f64) -> f64 {
    if p == 1.0 {
        soft_threshold(v, lambda)
    } else if p == 2.0 {
        v / (1.0 + 2.0 * lambda)
    } else {
        // |x| solves y + λp·y^(p−1) = |v|
        let y = solve_power_shrink(v.abs(), lambda * p, p - 1.0);
        y.copysign(v)
    }
}

/// Root `y ∈ [0, a]` of `y + c·y^e = a` for `a ≥ 0`, `c > 0`, `e > 0`.
///
/// The left-hand side is increasing, so Newton steps are kept inside a
/// shrinking bracket and replaced by bisection when they leave it.
pub(crate) fn solve_power_shrink(a: f64, c: f64, e: f64) -> f64 {
    solve_power_shrink_from(a, c, e, f64::INFINITY)
}

/// As [`solve_power_shrink`], starting Newton from `guess` when it lies in
/// `(0, a)`.
pub(crate) fn solve_power_shrink_from(a: f64, c: f64, e: f64, guess: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let mut lo = 0.0_f64;
    let (mut hi, mut y) = if guess > 0.0 && guess < a {
        (a, guess)
    } else {
        // both terms are non-negative, so y ≤ a and y ≤ (a/c)^(1/e)
        let hi = a.min(libm::pow(a / c, 1.0 / e));
        (hi, hi)
    };
    for _ in 0..200 {
        let ye = libm::pow(y, e);
        let fy = y + c * ye - a;
        if fy == 0.0 {
            return y;
        }
        if fy > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        let mut next = if y > 0.0 { y - fy / (1.0 + c * e * ye / y) } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - y).abs() <= 1e-16 * a || hi - lo <= 1e-16 * a {
            return next;
        }
        y = next;
    }
    y
}
