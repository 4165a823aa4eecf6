use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::InteractionKernel;
use crate::error::{domain, usage, Error, Result};
use crate::grid::{power_cell_averages, Convolver, DensityField, Grid1D, TimeMesh};

/// Default upper level for `D(T_0)`.
pub const DEFAULT_SAFETY: f64 = 0.5;

/// Sub-cells used for the product-integrated `f_1`, `f_2` and H.6 integrals.
const PRODUCT_CELLS: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisItem {
    pub name: String,
    /// The computed quantity (a supremum or an integral).
    pub value: f64,
    /// Bound the value is compared with; infinite when only finiteness is checked.
    /// For H.2 the value is a refinement ratio and the bound is a lower one.
    pub bound: f64,
    pub pass: bool,
    /// Raw probe data behind the verdict.
    pub probe: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub horizon: f64,
    /// H.1 through H.6, in order.
    pub items: Vec<HypothesisItem>,
    /// `f_1(t_k)`, `k = 1..=M`.
    pub f1: Vec<f64>,
    /// `f_2(t_k)`, `k = 1..=M`.
    pub f2: Vec<f64>,
    pub f1_sup: f64,
    pub f2_sup: f64,
    pub d_of_t: f64,
    /// Largest horizon with `D(T_0) < 1`, if any.
    pub t0: Option<f64>,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }

    pub fn item(&self, name: &str) -> Option<&HypothesisItem> {
        self.items.iter().find(|i| i.name == name)
    }
}

/// `D(T) = int_0^T ||K_t||_{L^1} dt`.
pub fn horizon_d(kernel: &dyn InteractionKernel, horizon: f64) -> Result<f64> {
    if !(horizon > 0.0) {
        return domain(format!("horizon must be positive, got {horizon}"));
    }
    Ok(kernel.l1_time_integral(0.0, horizon))
}

/// Largest `T_0` with `D(T_0) <= safety`. With `step` set the result is
/// rounded down to a multiple of it.
pub fn find_t0(kernel: &dyn InteractionKernel, safety: f64, step: Option<f64>) -> Result<f64> {
    if !(safety > 0.0 && safety <= 1.0) {
        return domain(format!("safety level must lie in (0, 1], got {safety}"));
    }
    let d = |t: f64| kernel.l1_time_integral(0.0, t);
    const CAP: f64 = 1e6;
    let mut lo = 1.0;
    let mut hi;
    if d(lo) <= safety {
        hi = 2.0;
        while d(hi) <= safety {
            lo = hi;
            hi *= 2.0;
            if hi > CAP {
                log::warn!("D(T) stays below {safety} up to T = {CAP}; capping the horizon");
                return Ok(round_down(CAP, step));
            }
        }
    } else {
        hi = lo;
        loop {
            lo = hi / 2.0;
            if lo < 1e-12 {
                return Err(Error::NoHorizon(format!(
                    "D(T) exceeds {safety} for every T down to 1e-12 (D(1e-12) = {:e})",
                    d(1e-12)
                )));
            }
            if d(lo) <= safety {
                break;
            }
            hi = lo;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if d(mid) <= safety {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t0 = round_down(lo, step);
    if t0 <= 0.0 {
        return Err(Error::NoHorizon(format!(
            "horizon {lo:e} is shorter than one mesh step"
        )));
    }
    Ok(t0)
}

fn round_down(t: f64, step: Option<f64>) -> f64 {
    match step {
        Some(dt) if dt > 0.0 => {
            // guard against t/dt landing a hair below an integer
            let k = (t / dt * (1.0 + 1e-12)).floor();
            let candidate = k * dt;
            if candidate > t * (1.0 + 1e-12) {
                (k - 1.0) * dt
            } else {
                candidate
            }
        }
        _ => t,
    }
}

/// Trial densities for H.5: Gaussians of several widths and centres, a
/// uniform law on `[-1/2, 1/2]` and a near-delta at the origin.
pub fn default_trials(grid: &Grid1D) -> Vec<DensityField> {
    let l = grid.half_width();
    let mut trials = Vec::new();
    for &var in &[1e-2, 0.25, 1.0] {
        for &mean in &[0.0, 0.25 * l] {
            if let Ok(g) = DensityField::gaussian(grid, mean, var) {
                trials.push(g);
            }
        }
    }
    if let Ok(u) = DensityField::uniform(grid, -0.5, 0.5) {
        trials.push(u);
    }
    let mut delta = vec![0.0; grid.len()];
    delta[grid.origin_index()] = 1.0 / grid.spacing();
    trials.push(DensityField::new(delta, 0.0));
    trials
}

/// `int_0^t ||K_{t-s}||_{L^1} s^{-1/2} ds`-type integrals by product
/// integration: the kernel-norm integral over each cell is exact and
/// `s^{-q}` is replaced by its exact cell average.
fn product_integral(cell_integral: impl Fn(f64, f64) -> f64, span: f64, q: f64) -> f64 {
    let ds = span / PRODUCT_CELLS as f64;
    let avg = power_cell_averages(ds, PRODUCT_CELLS, q);
    (0..PRODUCT_CELLS)
        .map(|l| {
            let (s0, s1) = (
                l as f64 * ds,
                if l + 1 == PRODUCT_CELLS {
                    span
                } else {
                    (l + 1) as f64 * ds
                },
            );
            cell_integral(s0, s1) * avg[l]
        })
        .sum()
}

fn finite_sup(values: &[f64]) -> f64 {
    values.iter().fold(
        0.0_f64,
        |m, &v| if v.is_nan() { f64::INFINITY } else { m.max(v) },
    )
}

fn h1(kernel: &dyn InteractionKernel, horizon: f64) -> HypothesisItem {
    let d1 = kernel.l1_time_integral(0.0, horizon);
    let d2 = kernel.l2_time_integral(0.0, horizon);
    // partial integrals over [T 10^-j, T]; they must settle as j grows
    let decades = |f: &dyn Fn(f64, f64) -> f64| -> (Vec<f64>, bool) {
        let partial: Vec<f64> = (1..=8)
            .map(|j| f(horizon * 10f64.powi(-j), horizon))
            .collect();
        if partial.iter().any(|v| !v.is_finite()) {
            return (partial, false);
        }
        let inc: Vec<f64> = partial.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let last = inc[inc.len() - 1];
        let prev = inc[inc.len() - 2];
        let scale = partial[partial.len() - 1].abs().max(1e-300);
        let settled = last <= 1e-14 * scale || (last <= 0.9 * prev && last <= 0.05 * scale);
        (partial, settled)
    };
    let (p1, ok1) = decades(&|a, b| kernel.l1_time_integral(a, b));
    let (p2, ok2) = decades(&|a, b| kernel.l2_time_integral(a, b));
    let mut probe = p1;
    probe.extend(p2);
    probe.push(d2);
    HypothesisItem {
        name: "H.1".into(),
        value: d1,
        bound: f64::INFINITY,
        pass: d1.is_finite() && d2.is_finite() && ok1 && ok2,
        probe,
    }
}

fn h2(kernel: &dyn InteractionKernel, horizon: f64, grid: &Grid1D) -> HypothesisItem {
    let times = [horizon, horizon / 10.0, horizon / 100.0];
    let results: Vec<(f64, bool)> = times
        .par_iter()
        .map(|&t| {
            let width = grid.half_width().min(10.0 * kernel.length_scale(t));
            let base = grid.spacing().min(t.sqrt() / 4.0);
            let jumps: Vec<f64> = (0..4)
                .map(|r| {
                    let delta = base / (1u64 << r) as f64;
                    let count = ((2.0 * width / delta).ceil() as usize).min(400_000);
                    let mut prev = kernel.eval(t, -width);
                    let mut worst = 0.0_f64;
                    for i in 1..=count {
                        let v = kernel.eval(t, -width + i as f64 * delta);
                        worst = worst.max((v - prev).abs());
                        prev = v;
                    }
                    worst
                })
                .collect();
            let ok = jumps[0] <= 1e-300 || (jumps[3].is_finite() && jumps[3] <= jumps[0] / 4.0);
            (jumps[0] / jumps[3].max(1e-300), ok)
        })
        .collect();
    HypothesisItem {
        name: "H.2".into(),
        value: results.iter().map(|r| r.0).fold(f64::INFINITY, f64::min),
        bound: 4.0,
        pass: results.iter().all(|r| r.1),
        probe: results.iter().map(|r| r.0).collect(),
    }
}

fn h3(kernel: &dyn InteractionKernel, horizon: f64) -> HypothesisItem {
    let xs = [-3.0, -1.0, -0.2, -0.05, 0.05, 0.2, 1.0, 3.0];
    let mut probe = Vec::new();
    let mut pass = true;
    let mut worst = 0.0_f64;
    for &x in &xs {
        let vals: Vec<f64> = (0..=6)
            .map(|j| kernel.eval(horizon * 10f64.powi(-j), x).abs())
            .collect();
        let peak = vals.iter().cloned().fold(0.0_f64, f64::max);
        let last = vals[vals.len() - 1];
        pass &= last.is_finite() && (last <= 1e-6 * peak || last <= 1e-300);
        worst = worst.max(last);
        probe.push(last);
    }
    HypothesisItem {
        name: "H.3".into(),
        value: worst,
        bound: 0.0,
        pass,
        probe,
    }
}

fn h5(
    kernel: &dyn InteractionKernel,
    mesh: &TimeMesh,
    grid: &Grid1D,
    trials: &[DensityField],
) -> HypothesisItem {
    let conv = Convolver::new(grid);
    let m = mesh.steps();
    let stride = m.div_ceil(8).max(1);
    let mut ks: Vec<usize> = (1..=m).step_by(stride).collect();
    if ks.last() != Some(&m) {
        ks.push(m);
    }
    let specs: Vec<_> = trials
        .iter()
        .map(|p| conv.field_spectrum(&p.values))
        .collect();
    let sups: Vec<f64> = ks
        .par_iter()
        .map(|&k| {
            let t = mesh.node(k);
            let lag = conv.sample_kernel(|z| kernel.abs_time_integral(t, z));
            if lag.iter().any(|v| !v.is_finite()) {
                return f64::INFINITY;
            }
            let ks = conv.kernel_spectrum(&lag);
            specs
                .iter()
                .map(|s| finite_sup(&conv.inverse(&s.product(&ks))))
                .fold(0.0_f64, f64::max)
        })
        .collect();
    let value = finite_sup(&sups);
    HypothesisItem {
        name: "H.5".into(),
        value,
        bound: f64::INFINITY,
        pass: value.is_finite(),
        probe: sups,
    }
}

/// Numerical verdicts on the six well-posedness hypotheses over `[0, T]`.
///
/// `f_1`, `f_2` and the H.6 supremum are sampled at the mesh nodes; H.5 takes
/// the supremum over the trial densities, a subset of mesh times and the
/// grid points.
pub fn check_hypotheses(
    kernel: &dyn InteractionKernel,
    horizon: f64,
    grid: &Grid1D,
    mesh: &TimeMesh,
    trials: &[DensityField],
) -> Result<HypothesisReport> {
    if !(horizon > 0.0) {
        return domain(format!("horizon must be positive, got {horizon}"));
    }
    if (mesh.horizon() - horizon).abs() > 1e-12 * horizon {
        return usage(format!(
            "mesh horizon {} differs from the checked horizon {horizon}",
            mesh.horizon()
        ));
    }
    if trials.is_empty() {
        return usage("H.5 needs at least one trial density");
    }
    for p in trials {
        grid.check_len(&p.values, "trial density")?;
    }

    let item1 = h1(kernel, horizon);
    let item2 = h2(kernel, horizon, grid);
    let item3 = h3(kernel, horizon);

    let nodes: Vec<f64> = (1..=mesh.steps()).map(|k| mesh.node(k)).collect();
    let (f1, f2): (Vec<f64>, Vec<f64>) = nodes
        .par_iter()
        .map(|&t| {
            let a = product_integral(|s0, s1| kernel.l1_time_integral(t - s1, t - s0), t, 0.5);
            let b = product_integral(|s0, s1| kernel.l2_time_integral(t - s1, t - s0), t, 0.25);
            (a, b)
        })
        .unzip();
    let f1_sup = finite_sup(&f1);
    let f2_sup = finite_sup(&f2);
    let mut probe4 = f1.clone();
    probe4.extend(&f2);
    let item4 = HypothesisItem {
        name: "H.4".into(),
        value: f1_sup.max(f2_sup),
        bound: f64::INFINITY,
        pass: f1_sup.is_finite() && f2_sup.is_finite(),
        probe: probe4,
    };

    let item5 = h5(kernel, mesh, grid, trials);

    let h6: Vec<f64> = std::iter::once(0.0)
        .chain(nodes.iter().cloned())
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&t| {
            product_integral(
                |s0, s1| kernel.l1_time_integral(horizon + t - s1, horizon + t - s0),
                horizon,
                0.5,
            )
        })
        .collect();
    let h6_sup = finite_sup(&h6);
    let item6 = HypothesisItem {
        name: "H.6".into(),
        value: h6_sup,
        bound: f64::INFINITY,
        pass: h6_sup.is_finite(),
        probe: h6,
    };

    let d_of_t = item1.value;
    let t0 = find_t0(kernel, 1.0 - 1e-9, None).ok();
    Ok(HypothesisReport {
        horizon,
        items: vec![item1, item2, item3, item4, item5, item6],
        f1,
        f2,
        f1_sup,
        f2_sup,
        d_of_t,
        t0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{KernelKind, KernelSpec, Normalization};
    use std::f64::consts::PI;

    #[test]
    fn d_has_closed_form_and_is_monotone() {
        let k = KernelSpec::keller_segel(1.0, 0.0).unwrap();
        for &t in &[0.01, 0.4, 2.0] {
            let d = horizon_d(&k, t).unwrap();
            assert!((d - 2.0 * (2.0 * t / PI).sqrt()).abs() < 1e-14);
        }
        let k = KernelSpec::keller_segel(1.0, 0.5).unwrap();
        let ds: Vec<f64> = (1..=100)
            .map(|i| horizon_d(&k, i as f64 * 0.05).unwrap())
            .collect();
        assert!(ds.windows(2).all(|w| w[1] >= w[0]));
        assert!(horizon_d(&k, 0.0).is_err());
    }

    #[test]
    fn t0_closed_form_and_chi_scaling() {
        let k = KernelSpec::keller_segel(1.0, 0.0).unwrap();
        let t0 = find_t0(&k, 1.0 - 1e-12, None).unwrap();
        assert!((t0 / (PI / 8.0) - 1.0).abs() < 1e-9);
        let k2 = KernelSpec::keller_segel(2.0, 0.0).unwrap();
        let t2 = find_t0(&k2, 1.0 - 1e-12, None).unwrap();
        assert!((t2 / t0 - 0.25).abs() < 1e-9);
        assert!(find_t0(&k, 1.5, None).is_err());
    }

    #[test]
    fn t0_on_mesh_is_the_last_admissible_step() {
        let k = KernelSpec::keller_segel(1.0, 0.3).unwrap();
        let dt = 1e-3;
        let t0 = find_t0(&k, 0.5, Some(dt)).unwrap();
        assert!(horizon_d(&k, t0).unwrap() <= 0.5);
        assert!(horizon_d(&k, t0 + dt).unwrap() > 0.5);
    }

    #[test]
    fn horizon_that_is_a_mesh_multiple_keeps_every_step() {
        let k = KernelSpec::keller_segel(1.0, 0.0).unwrap();
        let t0 = find_t0(&k, 0.5, None).unwrap();
        for m in [7, 40, 199, 200, 400, 1000] {
            let dt = 2.0 * t0 / (2 * m) as f64;
            let on_mesh = find_t0(&k, 0.5, Some(dt)).unwrap();
            assert_eq!((on_mesh / dt).round() as usize, m, "m = {m}");
        }
    }

    #[test]
    fn divergent_kernel_has_no_horizon() {
        let k = KernelSpec::new(
            1.0,
            0.0,
            Normalization::Heat,
            KernelKind::SignPower { exponent: 1.5 },
        )
        .unwrap();
        assert!(matches!(find_t0(&k, 0.5, None), Err(Error::NoHorizon(_))));
    }

    #[test]
    fn product_integration_reproduces_beta_function() {
        let k = KernelSpec::keller_segel(1.0, 0.0).unwrap();
        let f1 = product_integral(|a, b| k.l1_time_integral(1.0 - b, 1.0 - a), 1.0, 0.5);
        assert!((f1 / (2.0 * PI).sqrt() - 1.0).abs() < 1e-3);
        let f2 = product_integral(|a, b| k.l2_time_integral(1.0 - b, 1.0 - a), 1.0, 0.25);
        assert!((f2 / (PI.powf(0.75) / 2f64.sqrt()) - 1.0).abs() < 1e-3);
    }
}
