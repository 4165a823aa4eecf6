//! Interaction kernels `K_t(x)`: the chemotactic kernel
//! `K_t(x) = chi e^{-lambda t} d/dx g(t, x)`, pluggable alternatives, their
//! norms and time integrals, and numerical checks of the well-posedness
//! hypotheses.

mod hypothesis;

pub use hypothesis::{
    check_hypotheses, default_trials, find_t0, horizon_d, HypothesisItem, HypothesisReport,
    DEFAULT_SAFETY,
};

use std::f64::consts::PI;
use std::fmt::Debug;

use libm::{erf, erfc};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::grid::quad::{integrate, integrate_power_substituted};
use crate::grid::{heat_dx_cumulative, heat_dx_time_integral};

/// Normalizing constant in the chemotactic kernel's denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `sqrt(2 pi)`: the kernel is exactly `chi e^{-lambda t} d/dx g(t, x)`.
    #[default]
    Heat,
    /// `2 pi`.
    TwoPi,
}

impl Normalization {
    pub fn constant(self) -> f64 {
        match self {
            Normalization::Heat => (2.0 * PI).sqrt(),
            Normalization::TwoPi => 2.0 * PI,
        }
    }

    /// Ratio of this kernel to the heat-normalized one.
    pub fn relative_to_heat(self) -> f64 {
        (2.0 * PI).sqrt() / self.constant()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    KellerSegel,
    /// `K_t(x) = chi e^{-lambda t} t^{-exponent} sgn(x)`; not integrable in `x`.
    SignPower {
        exponent: f64,
    },
}

/// Everything the solvers need from an interaction kernel.
///
/// Only [`InteractionKernel::eval`] is required; every other quantity has a
/// numerical default. Closed forms should override them.
pub trait InteractionKernel: Send + Sync + Debug {
    /// `K_t(x)` for `t > 0`.
    fn eval(&self, t: f64, x: f64) -> f64;

    /// Typical spatial width at time `t`, used to size integration windows.
    fn length_scale(&self, t: f64) -> f64 {
        t.sqrt()
    }

    /// `||K_t||_{L^1}`; infinite when the spatial integral diverges.
    fn l1_norm(&self, t: f64) -> f64 {
        numeric_space_norm(self, t, 1)
    }

    /// `||K_t||_{L^2}`.
    fn l2_norm(&self, t: f64) -> f64 {
        numeric_space_norm(self, t, 2)
    }

    /// `int_a^b ||K_u||_{L^1} du`.
    fn l1_time_integral(&self, a: f64, b: f64) -> f64 {
        numeric_norm_time_integral(|u| self.l1_norm(u), a, b, 0.5)
    }

    /// `int_a^b ||K_u||_{L^2} du`.
    fn l2_time_integral(&self, a: f64, b: f64) -> f64 {
        numeric_norm_time_integral(|u| self.l2_norm(u), a, b, 0.75)
    }

    /// `int_a^b K_u(x) du`, `0 <= a <= b`.
    fn time_integral(&self, a: f64, b: f64, x: f64) -> f64 {
        integrate(
            |u| if u > 0.0 { self.eval(u, x) } else { 0.0 },
            a,
            b,
            1e-300,
            1e-12,
        )
        .value
    }

    /// `int_0^t |K_u(x)| du`.
    fn abs_time_integral(&self, t: f64, x: f64) -> f64 {
        let r = integrate(
            |u| if u > 0.0 { self.eval(u, x).abs() } else { 0.0 },
            0.0,
            t,
            1e-300,
            1e-10,
        );
        if r.converged {
            r.value
        } else {
            f64::INFINITY
        }
    }
}

fn numeric_space_norm<K: InteractionKernel + ?Sized>(k: &K, t: f64, p: i32) -> f64 {
    let f = |x: f64| k.eval(t, x).abs().powi(p);
    let piece = |a: f64, b: f64| integrate(f, a, b, 1e-300, 1e-11).value;
    let mut w = 8.0 * k.length_scale(t);
    let mut total = piece(-w, 0.0) + piece(0.0, w);
    for _ in 0..40 {
        if !total.is_finite() {
            return f64::INFINITY;
        }
        let extra = piece(-2.0 * w, -w) + piece(w, 2.0 * w);
        total += extra;
        w *= 2.0;
        if extra <= 1e-12 * total {
            return total.powf(1.0 / p as f64);
        }
    }
    f64::INFINITY
}

fn numeric_norm_time_integral(norm: impl Fn(f64) -> f64, a: f64, b: f64, gamma: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let r = if a > 0.0 {
        integrate(&norm, a, b, 0.0, 1e-10)
    } else {
        integrate_power_substituted(&norm, 0.0, b, gamma, 1e-10)
    };
    if r.converged && r.value.is_finite() {
        r.value
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub chi: f64,
    pub lambda: f64,
    pub normalization: Normalization,
    pub kind: KernelKind,
}

impl KernelSpec {
    /// Heat-normalized chemotactic kernel.
    pub fn keller_segel(chi: f64, lambda: f64) -> Result<Self> {
        Self::new(chi, lambda, Normalization::Heat, KernelKind::KellerSegel)
    }

    pub fn new(
        chi: f64,
        lambda: f64,
        normalization: Normalization,
        kind: KernelKind,
    ) -> Result<Self> {
        if !(chi.is_finite() && chi > 0.0) {
            return domain(format!("chi must be positive, got {chi}"));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return domain(format!("lambda must be nonnegative, got {lambda}"));
        }
        if let KernelKind::SignPower { exponent } = kind {
            if !exponent.is_finite() {
                return domain(format!("kernel exponent must be finite, got {exponent}"));
            }
        }
        Ok(Self {
            chi,
            lambda,
            normalization,
            kind,
        })
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    fn amplitude(&self) -> f64 {
        self.chi * self.normalization.relative_to_heat()
    }

    fn is_closed_form(&self) -> bool {
        matches!(self.kind, KernelKind::KellerSegel)
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) {
        return domain(format!("kernel needs t > 0, got {t}"));
    }
    Ok(())
}

/// `K_t(x)`.
pub fn kernel_eval(spec: &KernelSpec, t: f64, x: f64) -> Result<f64> {
    check_time(t)?;
    Ok(spec.eval(t, x))
}

/// `||K_t||_{L^1(R)}`.
pub fn kernel_l1_norm(spec: &KernelSpec, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(spec.l1_norm(t))
}

/// `||K_t||_{L^2(R)}`.
pub fn kernel_l2_norm(spec: &KernelSpec, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(spec.l2_norm(t))
}

/// `int_a^b e^{-lambda u} u^{-1/2} du`.
fn damped_sqrt_integral(a: f64, b: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return 2.0 * (b.sqrt() - a.sqrt());
    }
    let (lo, hi) = ((lambda * a).sqrt(), (lambda * b).sqrt());
    let diff = if lo > 0.5 {
        erfc(lo) - erfc(hi)
    } else {
        erf(hi) - erf(lo)
    };
    (PI / lambda).sqrt() * diff
}

impl InteractionKernel for KernelSpec {
    fn eval(&self, t: f64, x: f64) -> f64 {
        let damp = self.chi * (-self.lambda * t).exp();
        match self.kind {
            KernelKind::KellerSegel => {
                let c = self.normalization.constant();
                damp * (-x) / (c * t.powf(1.5)) * (-x * x / (2.0 * t)).exp()
            }
            KernelKind::SignPower { exponent } => {
                if x == 0.0 {
                    0.0
                } else {
                    damp * t.powf(-exponent) * x.signum()
                }
            }
        }
    }

    fn l1_norm(&self, t: f64) -> f64 {
        if !self.is_closed_form() {
            return numeric_space_norm(self, t, 1);
        }
        self.amplitude() * (-self.lambda * t).exp() * (2.0 / (PI * t)).sqrt()
    }

    fn l2_norm(&self, t: f64) -> f64 {
        if !self.is_closed_form() {
            return numeric_space_norm(self, t, 2);
        }
        self.amplitude() * (-self.lambda * t).exp() * 0.5 * PI.powf(-0.25) * t.powf(-0.75)
    }

    fn l1_time_integral(&self, a: f64, b: f64) -> f64 {
        if !self.is_closed_form() {
            return numeric_norm_time_integral(|u| self.l1_norm(u), a, b, 0.5);
        }
        if b <= a {
            return 0.0;
        }
        self.amplitude() * (2.0 / PI).sqrt() * damped_sqrt_integral(a, b, self.lambda)
    }

    fn l2_time_integral(&self, a: f64, b: f64) -> f64 {
        if self.is_closed_form() && self.lambda == 0.0 {
            if b <= a {
                return 0.0;
            }
            return self.amplitude() * 0.5 * PI.powf(-0.25) * 4.0 * (b.powf(0.25) - a.powf(0.25));
        }
        numeric_norm_time_integral(|u| self.l2_norm(u), a, b, 0.75)
    }

    fn time_integral(&self, a: f64, b: f64, x: f64) -> f64 {
        match self.kind {
            KernelKind::KellerSegel => {
                self.amplitude() * heat_dx_time_integral(a, b, self.lambda, x)
            }
            _ => {
                integrate(
                    |u| if u > 0.0 { self.eval(u, x) } else { 0.0 },
                    a,
                    b,
                    1e-300,
                    1e-12,
                )
                .value
            }
        }
    }

    fn abs_time_integral(&self, t: f64, x: f64) -> f64 {
        match self.kind {
            // the integrand keeps the sign of -x for all u
            KernelKind::KellerSegel => {
                self.amplitude() * heat_dx_cumulative(t, self.lambda, x).abs()
            }
            KernelKind::SignPower { exponent } => {
                if x == 0.0 {
                    0.0
                } else if exponent >= 1.0 {
                    f64::INFINITY
                } else {
                    let r = integrate_power_substituted(
                        |u| self.chi * (-self.lambda * u).exp() * u.powf(-exponent),
                        0.0,
                        t,
                        exponent.max(0.0),
                        1e-10,
                    );
                    r.value
                }
            }
        }
    }
}
