//! Transition density of the diffusion `dX = beta sgn(y - X) dt + dW`, and
//! the universal bound it gives on densities of every diffusion whose drift
//! is bounded by `beta`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Result};
use crate::grid::quad::integrate;
use crate::particle::{histogram, InitialLaw, ParticleEnsemble};

/// Drift magnitude, attractor, start point and time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QzParams {
    pub beta: f64,
    pub y: f64,
    pub x: f64,
    pub t: f64,
}

impl QzParams {
    pub fn new(beta: f64, y: f64, x: f64, t: f64) -> Result<Self> {
        let p = Self { beta, y, x, t };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return domain(format!(
                "beta must be finite and non-negative, got {}",
                self.beta
            ));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return domain(format!("t must be positive, got {}", self.t));
        }
        if !(self.x.is_finite() && self.y.is_finite()) {
            return domain("x and y must be finite");
        }
        Ok(())
    }
}

/// `p^beta_y(t, x, z)`: a `ybar`-integral over `[0, inf)` plus a difference
/// of Gaussians. The integral is cut where the integrand falls below 1e-15
/// of its peak.
pub fn qz_density(p: &QzParams, z: f64) -> Result<f64> {
    p.check()?;
    let QzParams { beta, y, x, t } = *p;
    let (dzy, dyx) = ((z - y).abs(), (y - x).abs());
    let a = dzy + dyx;
    let shift = beta * (dyx - dzy) - 0.5 * beta * beta * t;
    let f = |yb: f64| {
        let s = yb + a;
        s * (shift + beta * yb - s * s / (2.0 * t)).exp()
    };
    // the exponent is a downward parabola in ybar peaking at beta t - a
    // (the prefactor moves the peak by at most sqrt(t))
    let peak = (beta * t - a).max(0.0);
    let upper = peak + t.sqrt() * (2.0 * 36.0_f64).sqrt() + t.sqrt();
    let q = integrate(f, 0.0, upper, 0.0, 1e-13).require("sgn-drift density")?;
    let first = q / ((2.0 * PI).sqrt() * t.powf(1.5));
    let second = (shift).exp() / (2.0 * PI * t).sqrt()
        * ((-(z - x).powi(2) / (2.0 * t)).exp() - (-a * a / (2.0 * t)).exp());
    Ok(first + second)
}

/// `p^beta_y(t, x, y) = (2 pi t)^{-1/2} int_{|x-y|/sqrt t}^inf z e^{-(z - beta sqrt t)^2 / 2} dz`
/// in closed form: writing `z = (z - b) + b` with `b = beta sqrt t` gives
/// `e^{-(a-b)^2/2} + b sqrt(2 pi) Phi(b - a)`.
pub fn qz_density_at_y(p: &QzParams) -> Result<f64> {
    p.check()?;
    let lo = (p.x - p.y).abs() / p.t.sqrt();
    let b = p.beta * p.t.sqrt();
    let d = lo - b;
    let tail = (-0.5 * d * d).exp() + b * (2.0 * PI).sqrt() * 0.5 * libm::erfc(d / 2.0_f64.sqrt());
    Ok(tail / (2.0 * PI * p.t).sqrt())
}

/// Upper bound on the density at `y` at time `t` of any diffusion started
/// at `x` whose drift is bounded by `beta`.
pub fn qz_bound(t: f64, x: f64, y: f64, beta: f64) -> Result<f64> {
    qz_density_at_y(&QzParams::new(beta, y, x, t)?)
}

/// The same bound for a random start with law `p0`:
/// `int p0(x) qz_bound(t, x, y, beta) dx`.
pub fn qz_bound_mixed(t: f64, p0: &InitialLaw, y: f64, beta: f64) -> Result<f64> {
    QzParams::new(beta, y, 0.0, t)?;
    let b = |x: f64| qz_bound(t, x, y, beta).unwrap_or(0.0);
    // the integrand has a kink at x = y; split there
    let split = |lo: f64, hi: f64, w: &dyn Fn(f64) -> f64| -> Result<f64> {
        let f = |x: f64| w(x) * b(x);
        let mut total = 0.0;
        let cuts: Vec<f64> = if y > lo && y < hi {
            vec![lo, y, hi]
        } else {
            vec![lo, hi]
        };
        for c in cuts.windows(2) {
            total += integrate(f, c[0], c[1], 1e-14, 1e-11).require("mixed density bound")?;
        }
        Ok(total)
    };
    match p0 {
        InitialLaw::Point { x } => qz_bound(t, *x, y, beta),
        InitialLaw::Uniform { a, b: hi } => {
            let w = 1.0 / (hi - a);
            split(*a, *hi, &|_| w)
        }
        InitialLaw::Gaussian { mean, variance } => {
            let s = variance.sqrt();
            split(mean - 12.0 * s, mean + 12.0 * s, &|x| {
                (-(x - mean).powi(2) / (2.0 * variance)).exp() / (2.0 * PI * variance).sqrt()
            })
        }
        InitialLaw::Tabulated { grid, values, .. } => {
            let mass: f64 = values.iter().sum();
            Ok(values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v > 0.0)
                .map(|(i, v)| v / mass * b(grid.point(i)))
                .sum())
        }
    }
}

/// `sup p_0`, when the law has a bounded density.
pub fn law_sup(p0: &InitialLaw) -> Option<f64> {
    match p0 {
        InitialLaw::Point { .. } => None,
        InitialLaw::Uniform { a, b } => Some(1.0 / (b - a)),
        InitialLaw::Gaussian { variance, .. } => Some(1.0 / (2.0 * PI * variance).sqrt()),
        InitialLaw::Tabulated { grid, values, .. } => {
            let mass: f64 = values.iter().sum::<f64>() * grid.spacing();
            Some(values.iter().fold(0.0_f64, |m, v| m.max(*v)) / mass)
        }
    }
}

/// One bin above its bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinViolation {
    pub centre: f64,
    pub density: f64,
    pub bound: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeCheck {
    pub t: f64,
    pub step: usize,
    /// Largest `(density - bound) / stderr` over bins (negative when all
    /// bins sit below the bound).
    pub worst_z: f64,
    pub sup_density: f64,
    pub violations: Vec<BinViolation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub beta: f64,
    pub checks: Vec<TimeCheck>,
    /// `2 sup p_0 + beta`, for laws with a bounded density.
    pub sup_bound: Option<f64>,
    pub sup_density: f64,
    pub pass: bool,
}

/// Histogram the ensemble at each requested step and flag bins whose
/// density exceeds the mixed bound plus three standard errors. The bound
/// over a bin is its largest value at the bin's edges and centre.
pub fn verify_bound(
    ensemble: &ParticleEnsemble,
    p0: &InitialLaw,
    beta: Option<f64>,
    steps: &[usize],
    range: (f64, f64),
    bins: usize,
) -> Result<BoundReport> {
    let Some(beta) = beta else {
        return usage("the drift bound beta was not declared");
    };
    if steps.contains(&0) {
        return usage("the bound holds for t > 0 only");
    }
    let mut checks = Vec::with_capacity(steps.len());
    let mut sup_density = 0.0_f64;
    for &k in steps {
        let t = ensemble.time(k);
        let h = histogram(ensemble.positions(k)?, range.0, range.1, bins)?;
        let w = h.width();
        let mut check = TimeCheck {
            t,
            step: k,
            worst_z: f64::NEG_INFINITY,
            sup_density: 0.0,
            violations: Vec::new(),
        };
        for (i, &c) in h.centres.iter().enumerate() {
            let bound = [c - 0.5 * w, c, c + 0.5 * w]
                .iter()
                .map(|&z| qz_bound_mixed(t, p0, z, beta))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0_f64, f64::max);
            let (d, se) = (h.density[i], h.stderr[i]);
            check.sup_density = check.sup_density.max(d);
            // empty bins carry no information about the excess
            if se > 0.0 {
                check.worst_z = check.worst_z.max((d - bound) / se);
            }
            if d > bound + 3.0 * se {
                check.violations.push(BinViolation {
                    centre: c,
                    density: d,
                    bound,
                    stderr: se,
                });
            }
        }
        sup_density = sup_density.max(check.sup_density);
        checks.push(check);
    }
    let pass = checks.iter().all(|c| c.violations.is_empty());
    Ok(BoundReport {
        beta,
        checks,
        sup_bound: law_sup(p0).map(|s| 2.0 * s + beta),
        sup_density,
        pass,
    })
}

/// `C` in `sup p_t <= C ||p_0||_{L^p} / t^{1/(2p)} + beta`, measured.
pub fn empirical_lp_constant(sup_density: f64, p0_lp: f64, p: f64, t: f64, beta: f64) -> f64 {
    (sup_density - beta).max(0.0) * t.powf(1.0 / (2.0 * p)) / p0_lp
}
