//! The Brownian transition density `g(t, x) = (2 pi t)^{-1/2} exp(-x^2 / 2t)`
//! and its exact time integrals.

use std::f64::consts::PI;

use libm::erfc;

use crate::error::{domain, Result};

#[inline]
pub(crate) fn gauss(t: f64, x: f64) -> f64 {
    (-x * x / (2.0 * t)).exp() / (2.0 * PI * t).sqrt()
}

#[inline]
pub(crate) fn gauss_dx(t: f64, x: f64) -> f64 {
    -x / t * gauss(t, x)
}

/// Density of `W_t` at `x`.
pub fn heat_kernel(t: f64, x: f64) -> Result<f64> {
    if !(t > 0.0) {
        return domain(format!("heat kernel needs t > 0, got {t}"));
    }
    Ok(gauss(t, x))
}

/// Spatial derivative of the heat kernel.
pub fn heat_kernel_dx(t: f64, x: f64) -> Result<f64> {
    if !(t > 0.0) {
        return domain(format!("heat kernel needs t > 0, got {t}"));
    }
    Ok(gauss_dx(t, x))
}

/// `e^{-A} erfc(B - s) + e^{A} erfc(B + s)` with `A = |x| sqrt(2 lambda)`,
/// `B = |x| / sqrt(2 b)`, `s = sqrt(lambda b)`.
///
/// The second product is evaluated as one exponential so it never overflows.
fn erfc_pair(b: f64, lambda: f64, ax: f64) -> (f64, f64) {
    let a = ax * (2.0 * lambda).sqrt();
    let big_b = ax / (2.0 * b).sqrt();
    let s = (lambda * b).sqrt();
    let minus = (-a).exp() * erfc(big_b - s);
    let arg = big_b + s;
    let plus = if arg > 26.0 {
        // erfc(z) ~ exp(-z^2) / (z sqrt(pi)); e^{A - (B+s)^2} = e^{-x^2/2b - lambda b}
        let lead = (-ax * ax / (2.0 * b) - lambda * b).exp() / (arg * PI.sqrt());
        lead * (1.0 - 0.5 / (arg * arg))
    } else {
        a.exp() * erfc(arg)
    };
    (minus, plus)
}

/// `int_0^b e^{-lambda u} d/dx g(u, x) du`, exact.
///
/// Equals `-sgn(x) erfc(|x| / sqrt(2b))` when `lambda = 0`. Vanishes at `x = 0`
/// and for `b = 0`.
pub fn heat_dx_cumulative(b: f64, lambda: f64, x: f64) -> f64 {
    if b <= 0.0 || x == 0.0 {
        return 0.0;
    }
    let ax = x.abs();
    let value = if lambda == 0.0 {
        erfc(ax / (2.0 * b).sqrt())
    } else {
        let (minus, plus) = erfc_pair(b, lambda, ax);
        0.5 * (minus + plus)
    };
    -x.signum() * value
}

/// `int_0^b e^{-lambda u} g(u, x) du`, exact up to a relative error of
/// about `1e-9` when `lambda` is tiny but nonzero.
pub fn heat_cumulative(b: f64, lambda: f64, x: f64) -> f64 {
    if b <= 0.0 {
        return 0.0;
    }
    let ax = x.abs();
    let free =
        || (2.0 * b / PI).sqrt() * (-ax * ax / (2.0 * b)).exp() - ax * erfc(ax / (2.0 * b).sqrt());
    if lambda == 0.0 {
        return free();
    }
    let root = (2.0 * lambda).sqrt();
    if root * (ax + b.sqrt()) < 1e-4 {
        // the closed form below cancels catastrophically in this corner
        return free() * (-0.5 * lambda * b).exp();
    }
    let (minus, plus) = erfc_pair(b, lambda, ax);
    (minus - plus) / (2.0 * root)
}

/// `int_a^b e^{-lambda u} g(u, x) du` for `0 <= a <= b`.
pub fn heat_time_integral(a: f64, b: f64, lambda: f64, x: f64) -> f64 {
    heat_cumulative(b, lambda, x) - heat_cumulative(a, lambda, x)
}

/// `int_a^b e^{-lambda u} d/dx g(u, x) du` for `0 <= a <= b`.
pub fn heat_dx_time_integral(a: f64, b: f64, lambda: f64, x: f64) -> f64 {
    heat_dx_cumulative(b, lambda, x) - heat_dx_cumulative(a, lambda, x)
}
