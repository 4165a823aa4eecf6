//! Quadrature: Gauss-Legendre and adaptive Gauss-Kronrod rules, power-law
//! endpoint substitution and product-integration weights for weakly
//! singular time integrals.

use super::TimeMesh;
use crate::error::{domain, Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
    pub converged: bool,
}

impl QuadResult {
    pub fn require(self, what: &str) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::Numeric(format!(
                "{what}: quadrature did not converge (value {:.6e}, error estimate {:.3e}, {} intervals)",
                self.value, self.error, self.intervals
            )))
        }
    }
}

fn kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = r * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * r, ((k - g) * r).abs())
}

/// Globally adaptive 15-point Gauss-Kronrod integration of `f` over `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> QuadResult {
    const MAX_INTERVALS: usize = 2000;
    if a == b {
        return QuadResult {
            value: 0.0,
            error: 0.0,
            intervals: 0,
            converged: true,
        };
    }
    let (v, e) = kronrod(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    loop {
        if !total.is_finite() {
            return QuadResult {
                value: total,
                error: f64::INFINITY,
                intervals: parts.len(),
                converged: false,
            };
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return QuadResult {
                value: total,
                error: err,
                intervals: parts.len(),
                converged: true,
            };
        }
        if parts.len() >= MAX_INTERVALS {
            return QuadResult {
                value: total,
                error: err,
                intervals: parts.len(),
                converged: false,
            };
        }
        let worst = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, v0, e0) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = kronrod(&f, lo, mid);
        let (v2, e2) = kronrod(&f, mid, hi);
        total += v1 + v2 - v0;
        err += e1 + e2 - e0;
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
        // refresh the running sums now and then to shed accumulated rounding
        if parts.len() % 64 == 0 {
            total = parts.iter().map(|p| p.2).sum();
            err = parts.iter().map(|p| p.3).sum();
        }
    }
}

/// `int_a^b f(u) du` for `f` with a `u^{-gamma}` singularity at `u = 0`
/// (`0 <= a <= b`, `0 <= gamma < 1`), via `u = v^m`, `m = 1 / (1 - gamma)`,
/// which leaves a bounded integrand.
pub fn integrate_power_substituted(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    gamma: f64,
    rel_tol: f64,
) -> QuadResult {
    let m = 1.0 / (1.0 - gamma);
    let (va, vb) = (a.powf(1.0 / m), b.powf(1.0 / m));
    integrate(
        |v: f64| {
            if v == 0.0 {
                // the substituted integrand is finite at 0; take the limit from the right
                let e = 1e-300_f64.max(vb * 1e-12);
                m * e.powf(m - 1.0) * f(e.powf(m))
            } else {
                m * v.powf(m - 1.0) * f(v.powf(m))
            }
        },
        va,
        vb,
        0.0,
        rel_tol,
    )
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = n as f64 * (x * p - p0) / (x * x - 1.0);
            let step = p / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Product-integration weights for `int_0^{t_k} (t_k - s)^{-gamma} phi(s) ds`
/// with `phi` frozen on each mesh subinterval:
/// `w_l = int_{t_l}^{t_{l+1}} (t_k - s)^{-gamma} ds`, `l = 0..k`.
pub fn singular_time_weights(mesh: &TimeMesh, k: usize, gamma: f64) -> Result<Vec<f64>> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return domain(format!("singular exponent must lie in (0, 1), got {gamma}"));
    }
    if k == 0 || k > mesh.steps() {
        return domain(format!(
            "step index must lie in 1..={}, got {k}",
            mesh.steps()
        ));
    }
    let dt = mesh.dt();
    let p = 1.0 - gamma;
    Ok((0..k)
        .map(|l| {
            let far = ((k - l) as f64 * dt).powf(p);
            let near = ((k - l - 1) as f64 * dt).powf(p);
            (far - near) / p
        })
        .collect())
}

/// Cell averages of `s^{-q}` over `[l dt, (l+1) dt]`, `l = 0..cells`.
pub fn power_cell_averages(dt: f64, cells: usize, q: f64) -> Vec<f64> {
    let p = 1.0 - q;
    (0..cells)
        .map(|l| {
            let hi = ((l + 1) as f64 * dt).powf(p);
            let lo = (l as f64 * dt).powf(p);
            (hi - lo) / (p * dt)
        })
        .collect()
}
