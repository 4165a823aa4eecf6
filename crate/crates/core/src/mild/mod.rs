//! The mild equation
//! `p_t = g(t) * p_0 - int_0^t d/dx g(t-s) * ((b + B(s; p)) p_s) ds`
//! for the time marginals, with `B(t, x; p) = int_0^t (K_{t-s} * p_s)(x) ds`:
//! causal time marching, Picard iteration on a contraction horizon, and
//! restarts that carry the frozen memory of earlier windows.

mod history;

pub use history::{compare_histories, ErrorTable, MarginalHistory};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Error, Result};
use crate::field::{ChemotacticDrift, ExogenousDrift, InitialChemical};
use crate::grid::{
    causal_sum, clip_negative, heat_kernel_dx, lagged_sum, Convolver, DensityField, Grid1D,
    Spectrum, TimeMesh, DEFAULT_CLIP_TOL,
};
use crate::kernel::{find_t0, horizon_d, InteractionKernel, KernelSpec, DEFAULT_SAFETY};

/// Drift coefficients of the nonlinear equation: an optional interaction
/// kernel and an optional exogenous drift.
#[derive(Debug, Clone, Default)]
pub struct Model {
    pub kernel: Option<Arc<dyn InteractionKernel>>,
    pub drift: Option<Arc<dyn ExogenousDrift>>,
}

impl Model {
    /// No drift at all: pure heat flow.
    pub fn heat() -> Self {
        Self::default()
    }

    pub fn new(
        kernel: Option<Arc<dyn InteractionKernel>>,
        drift: Option<Arc<dyn ExogenousDrift>>,
    ) -> Self {
        Self { kernel, drift }
    }

    /// Chemotactic kernel of `spec` and the drift `b` built from `chem`.
    pub fn keller_segel(spec: KernelSpec, chem: InitialChemical) -> Self {
        let drift = ChemotacticDrift::new(&spec, chem);
        Self {
            kernel: Some(Arc::new(spec)),
            drift: Some(Arc::new(drift)),
        }
    }

    fn drift_at(&self, grid: &Grid1D, t: f64) -> Vec<f64> {
        match &self.drift {
            Some(d) => d.sample(grid, t),
            None => vec![0.0; grid.len()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Per-step tolerance on mass drift; ten times this is fatal.
    pub mass_tol: f64,
    /// Negatives no deeper than this are roundoff and set to zero.
    pub clip_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            mass_tol: 1e-6,
            clip_tol: DEFAULT_CLIP_TOL,
        }
    }
}

/// Where a memory drift came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriftSource {
    SelfHistory,
    Prefix,
    Iterate(usize),
}

/// `B(t_k, x_i)` on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryDrift {
    pub values: Vec<f64>,
    pub time: f64,
    pub source: DriftSource,
}

impl MemoryDrift {
    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Spectra of the exact kernel time integrals
/// `int_{(j-1) dt}^{j dt} K_u(.) du`, `j = 1..`: with `p` frozen at the left
/// node of each subinterval, `B(t_k) = sum_{l<k} bank_{k-l} * p_{t_l}`.
#[derive(Debug, Clone)]
pub struct MemoryKernelBank {
    conv: Convolver,
    dt: f64,
    lags: Vec<Spectrum>,
}

impl MemoryKernelBank {
    pub fn new(kernel: &dyn InteractionKernel, grid: &Grid1D, dt: f64, count: usize) -> Self {
        let conv = Convolver::new(grid);
        let lags = conv.lag_bank(count, |j, x| {
            kernel.time_integral((j - 1) as f64 * dt, j as f64 * dt, x)
        });
        Self { conv, dt, lags }
    }

    pub fn convolver(&self) -> &Convolver {
        &self.conv
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn lags(&self) -> &[Spectrum] {
        &self.lags
    }

    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }

    /// `B` at step `k` from the spectra of rows `0..k`.
    pub fn memory(&self, rows: &[Spectrum], k: usize) -> Vec<f64> {
        if k == 0 {
            return vec![0.0; self.conv.grid().len()];
        }
        self.conv.inverse(&causal_sum(&self.lags, rows, k))
    }
}

/// `B(t_k, .; p)` from rows `0..k` of `history`.
pub fn memory_drift(
    history: &MarginalHistory,
    kernel: &dyn InteractionKernel,
    k: usize,
) -> Result<MemoryDrift> {
    if k > history.mesh().steps() {
        return usage(format!(
            "step {k} is beyond the mesh ({} steps)",
            history.mesh().steps()
        ));
    }
    if history.len() < k {
        return usage(format!(
            "memory drift at step {k} needs rows 0..{k}, only {} populated",
            history.len()
        ));
    }
    let grid = history.grid();
    let bank = MemoryKernelBank::new(kernel, grid, history.mesh().dt(), k);
    let rows: Vec<Spectrum> = history.rows()[..k]
        .iter()
        .map(|r| bank.conv.field_spectrum(r))
        .collect();
    Ok(MemoryDrift {
        values: bank.memory(&rows, k),
        time: history.time(k),
        source: DriftSource::SelfHistory,
    })
}

/// One mild step `p + dt (d/dx g(dt)) * (u p)` subtracted from `g(dt) * p`.
struct Stepper {
    conv: Convolver,
    heat: Spectrum,
    grad: Spectrum,
}

impl Stepper {
    fn new(grid: &Grid1D, dt: f64) -> Self {
        let conv = Convolver::new(grid);
        if grid.aliasing_bound(dt) > 1e-8 {
            log::warn!(
                "time step {dt:e} under-resolves the heat kernel on spacing {:e} (aliasing bound {:e})",
                grid.spacing(),
                grid.aliasing_bound(dt)
            );
        }
        let heat = conv.kernel_spectrum(
            &conv.sample_kernel(|x| crate::grid::heat_kernel(dt, x).unwrap_or(0.0)),
        );
        let grad = conv
            .kernel_spectrum(&conv.sample_kernel(|x| dt * heat_kernel_dx(dt, x).unwrap_or(0.0)));
        Self { conv, heat, grad }
    }

    fn step(&self, p_spec: &Spectrum, p: &[f64], u: &[f64]) -> Vec<f64> {
        let flux: Vec<f64> = p.iter().zip(u).map(|(a, b)| a * b).collect();
        let flux_spec = self.conv.field_spectrum(&flux);
        let out = Spectrum(
            p_spec
                .0
                .iter()
                .zip(&self.heat.0)
                .zip(flux_spec.0.iter().zip(&self.grad.0))
                .map(|((p, g), (f, d))| p * g - f * d)
                .collect(),
        );
        self.conv.inverse(&out)
    }
}

/// Memory used by a window march.
enum Memory<'a> {
    /// Rows of the run itself (the nonlinear causal scheme).
    Own,
    /// Rows of a previous iterate (the linear equation of a Picard step).
    Frozen(&'a [Spectrum]),
}

struct Window<'a> {
    grid: &'a Grid1D,
    mesh: TimeMesh,
    start: f64,
    stepper: &'a Stepper,
    bank: Option<&'a MemoryKernelBank>,
    /// Exogenous drift plus memory from earlier windows, per local step.
    exo: &'a [Vec<f64>],
    opts: &'a SolveOptions,
    /// Global index of row 0, for error messages.
    offset: usize,
}

impl Window<'_> {
    fn run(&self, row0: Vec<f64>, memory: Memory<'_>) -> Result<(MarginalHistory, Vec<Spectrum>)> {
        let steps = self.mesh.steps();
        let conv = &self.stepper.conv;
        let mut history = MarginalHistory::starting_at(self.grid, &self.mesh, self.start, row0)?;
        let mut spectra = Vec::with_capacity(steps + 1);
        for k in 0..steps {
            let p = history.last().to_vec();
            let p_spec = conv.field_spectrum(&p);
            spectra.push(p_spec);
            let mut u = self.exo[k].clone();
            if let Some(bank) = self.bank {
                if k > 0 {
                    let rows: &[Spectrum] = match memory {
                        Memory::Own => &spectra,
                        Memory::Frozen(s) => s,
                    };
                    let b = bank.memory(rows, k);
                    u.iter_mut().zip(&b).for_each(|(a, b)| *a += b);
                }
            }
            let mut next = self.stepper.step(&spectra[k], &p, &u);
            let mass = self.grid.integrate(&next);
            let drift = (mass - 1.0).abs();
            let step = self.offset + k + 1;
            if !(drift <= 10.0 * self.opts.mass_tol) {
                return Err(Error::Instability {
                    step,
                    drift,
                    limit: 10.0 * self.opts.mass_tol,
                });
            }
            if drift > self.opts.mass_tol {
                log::warn!("step {step}: mass drift {drift:.3e} above tolerance");
            }
            let clip = clip_negative(&mut next, self.opts.clip_tol);
            let renorm = self.grid.integrate(&next);
            next.iter_mut().for_each(|v| *v /= renorm);
            history.push(next, mass, clip);
        }
        spectra.push(conv.field_spectrum(history.last()));
        Ok((history, spectra))
    }
}

fn check_p0(grid: &Grid1D, p0: &DensityField) -> Result<()> {
    grid.check_len(&p0.values, "p0")?;
    let mass = grid.integrate(&p0.values);
    if !((mass - 1.0).abs() <= 1e-3) {
        return domain(format!(
            "p0 must be a probability density, its mass is {mass}"
        ));
    }
    Ok(())
}

/// Exogenous drift at global steps `0..steps`.
fn exogenous(model: &Model, grid: &Grid1D, mesh: &TimeMesh) -> Vec<Vec<f64>> {
    (0..mesh.steps())
        .map(|k| model.drift_at(grid, mesh.node(k)))
        .collect()
}

/// Causal march of the nonlinear mild equation on one mesh:
/// `p_{k+1} = g(dt) * p_k - dt (d/dx g(dt)) * (u_k p_k)` with
/// `u_k = b(t_k) + B(t_k; p_0..p_{k-1})`.
pub fn march(
    p0: &DensityField,
    model: &Model,
    grid: &Grid1D,
    mesh: &TimeMesh,
    opts: &SolveOptions,
) -> Result<MarginalHistory> {
    check_p0(grid, p0)?;
    let stepper = Stepper::new(grid, mesh.dt());
    let bank = model
        .kernel
        .as_ref()
        .map(|k| MemoryKernelBank::new(k.as_ref(), grid, mesh.dt(), mesh.steps()));
    let exo = exogenous(model, grid, mesh);
    let window = Window {
        grid,
        mesh: *mesh,
        start: 0.0,
        stepper: &stepper,
        bank: bank.as_ref(),
        exo: &exo,
        opts,
        offset: 0,
    };
    Ok(window.run(p0.values.clone(), Memory::Own)?.0)
}

/// Outcome of a Picard iteration.
#[derive(Debug, Clone)]
pub struct PicardResult {
    /// Iterates `p^1, p^2, ...`.
    pub iterates: Vec<MarginalHistory>,
    /// `sup_k ||p^j_{t_k} - p^{j-1}_{t_k}||_{L^1}`, with `p^0` the frozen `p_0`.
    pub distances: Vec<f64>,
    pub converged: bool,
}

impl PicardResult {
    pub fn last(&self) -> &MarginalHistory {
        self.iterates.last().expect("at least one iterate")
    }

    /// Successive distance ratios.
    pub fn ratios(&self) -> Vec<f64> {
        self.distances.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardSettings {
    pub safety: f64,
    pub k_max: usize,
    pub tol: f64,
}

impl Default for PicardSettings {
    fn default() -> Self {
        Self {
            safety: DEFAULT_SAFETY,
            k_max: 60,
            tol: 1e-10,
        }
    }
}

fn sup_l1(grid: &Grid1D, a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| grid.spacing() * x.iter().zip(y).map(|(u, v)| (u - v).abs()).sum::<f64>())
        .fold(0.0_f64, f64::max)
}

fn picard_window(
    window: &Window<'_>,
    row0: Vec<f64>,
    k_max: usize,
    tol: f64,
) -> Result<PicardResult> {
    let steps = window.mesh.steps();
    let conv = &window.stepper.conv;
    let frozen_spec = conv.field_spectrum(&row0);
    let mut prev_rows = vec![row0.clone(); steps + 1];
    let mut prev_specs = vec![frozen_spec; steps + 1];
    let mut result = PicardResult {
        iterates: Vec::new(),
        distances: Vec::new(),
        converged: false,
    };
    let mut rising = 0;
    for j in 1..=k_max.max(1) {
        let (history, specs) = window.run(row0.clone(), Memory::Frozen(&prev_specs))?;
        let d = sup_l1(window.grid, history.rows(), &prev_rows);
        if let Some(&last) = result.distances.last() {
            rising = if d > last { rising + 1 } else { 0 };
        }
        result.distances.push(d);
        prev_rows = history.rows().to_vec();
        prev_specs = specs;
        result.iterates.push(history);
        log::debug!("picard iterate {j}: distance {d:.3e}");
        if d < tol {
            result.converged = true;
            break;
        }
        if rising >= 3 {
            let n = result.distances.len();
            return Err(Error::Divergence {
                iterations: j,
                last: result.distances[n.saturating_sub(4)..].to_vec(),
            });
        }
    }
    Ok(result)
}

/// Picard iteration on `[0, T_0]`: iterate 1 uses `p_0` frozen as the whole
/// history, iterate `j` solves the linear mild equation whose memory drift
/// comes from iterate `j - 1`.
pub fn picard(
    p0: &DensityField,
    model: &Model,
    grid: &Grid1D,
    mesh: &TimeMesh,
    k_max: usize,
    tol: f64,
    opts: &SolveOptions,
) -> Result<PicardResult> {
    check_p0(grid, p0)?;
    if let Some(k) = &model.kernel {
        let d = horizon_d(k.as_ref(), mesh.horizon())?;
        if d >= 1.0 {
            log::warn!(
                "D(T) = {d:.4} >= 1 on the Picard horizon {}",
                mesh.horizon()
            );
        }
    }
    let stepper = Stepper::new(grid, mesh.dt());
    let bank = model
        .kernel
        .as_ref()
        .map(|k| MemoryKernelBank::new(k.as_ref(), grid, mesh.dt(), mesh.steps()));
    let exo = exogenous(model, grid, mesh);
    let window = Window {
        grid,
        mesh: *mesh,
        start: 0.0,
        stepper: &stepper,
        bank: bank.as_ref(),
        exo: &exo,
        opts,
        offset: 0,
    };
    picard_window(&window, p0.values.clone(), k_max, tol)
}

/// `b_1(t, x) = int_0^{T_0} (K_{T_0 + t - s} * p_s)(x) ds` for the completed
/// prefix history on `[0, T_0]`, with rows frozen at left nodes.
/// Near `t = 0` the newest lag is still discontinuous at the origin, so
/// points off the grid are only first-order accurate there.
pub fn restart_drift(
    prefix: &MarginalHistory,
    kernel: &dyn InteractionKernel,
    t: f64,
    x: f64,
) -> Result<f64> {
    if !prefix.is_complete() {
        return usage("restart drift needs the complete prefix history");
    }
    let mesh = prefix.mesh();
    let t0 = mesh.horizon();
    if !(t >= 0.0 && t <= t0) {
        return domain(format!("restart time must lie in [0, {t0}], got {t}"));
    }
    let grid = prefix.grid();
    let (l, h) = (grid.half_width(), grid.spacing());
    let mut total = 0.0;
    for s in 0..mesh.steps() {
        let (a, b) = (t0 + t - mesh.node(s + 1), t0 + t - mesh.node(s));
        let row = &prefix.rows()[s];
        let mut acc = 0.0;
        for (j, &p) in row.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let d = grid.wrap(x - grid.point(j));
            let k = if (d + l).abs() < 1e-9 * h {
                0.5 * (kernel.time_integral(a, b, -l) + kernel.time_integral(a, b, l))
            } else {
                kernel.time_integral(a, b, d)
            };
            acc += p * k;
        }
        total += h * acc;
    }
    Ok(total)
}

/// `b_1(t_j, .)` on the grid for the mesh time `t_j = j dt`, `0 <= j <= M_0`.
pub fn restart_drift_field(
    prefix: &MarginalHistory,
    kernel: &dyn InteractionKernel,
    j: usize,
) -> Result<MemoryDrift> {
    if !prefix.is_complete() {
        return usage("restart drift needs the complete prefix history");
    }
    let m0 = prefix.mesh().steps();
    if j > m0 {
        return domain(format!("restart step must lie in 0..={m0}, got {j}"));
    }
    let bank = MemoryKernelBank::new(kernel, prefix.grid(), prefix.mesh().dt(), m0 + j);
    let rows: Vec<Spectrum> = prefix.rows()[..m0]
        .iter()
        .map(|r| bank.conv.field_spectrum(r))
        .collect();
    Ok(MemoryDrift {
        values: bank.conv.inverse(&lagged_sum(&bank.lags, &rows, m0 + j)),
        time: prefix.mesh().horizon() + prefix.mesh().node(j),
        source: DriftSource::Prefix,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMode {
    March,
    PicardWithRestart(PicardSettings),
}

#[derive(Debug, Clone)]
pub struct GlobalSolution {
    pub history: MarginalHistory,
    /// Steps per window (the whole mesh in march mode).
    pub window_steps: usize,
    pub windows: usize,
    /// Picard distances per window.
    pub picard_distances: Vec<Vec<f64>>,
}

/// Solve on `[0, T]`, either by one causal march or by Picard iteration on
/// windows of length `T_0` (largest mesh multiple with `D(T_0) <= safety`),
/// each window driven by the frozen memory of all earlier ones.
pub fn solve_global(
    p0: &DensityField,
    model: &Model,
    grid: &Grid1D,
    mesh: &TimeMesh,
    mode: SolveMode,
    opts: &SolveOptions,
) -> Result<GlobalSolution> {
    let settings = match mode {
        SolveMode::March => {
            let history = march(p0, model, grid, mesh, opts)?;
            return Ok(GlobalSolution {
                history,
                window_steps: mesh.steps(),
                windows: 1,
                picard_distances: Vec::new(),
            });
        }
        SolveMode::PicardWithRestart(s) => s,
    };
    check_p0(grid, p0)?;
    let dt = mesh.dt();
    let m = mesh.steps();
    let window_steps = match &model.kernel {
        Some(k) => {
            let t0 = find_t0(k.as_ref(), settings.safety, Some(dt))?;
            ((t0 / dt).round() as usize).clamp(1, m)
        }
        None => m,
    };
    let stepper = Stepper::new(grid, dt);
    let bank = model
        .kernel
        .as_ref()
        .map(|k| MemoryKernelBank::new(k.as_ref(), grid, dt, m));
    let exo_all = exogenous(model, grid, mesh);

    let mut global: Option<MarginalHistory> = None;
    let mut global_specs: Vec<Spectrum> = Vec::new();
    let mut distances = Vec::new();
    let mut k0 = 0;
    let mut windows = 0;
    while k0 < m {
        let steps = window_steps.min(m - k0);
        let row0 = match &global {
            Some(h) => h.last().to_vec(),
            None => p0.values.clone(),
        };
        let mut exo: Vec<Vec<f64>> = exo_all[k0..k0 + steps].to_vec();
        if let (Some(bank), true) = (&bank, k0 > 0) {
            // frozen memory of every earlier window
            for (k, e) in exo.iter_mut().enumerate() {
                let prefix =
                    bank.conv
                        .inverse(&lagged_sum(&bank.lags, &global_specs[..k0], k0 + k));
                e.iter_mut().zip(&prefix).for_each(|(a, b)| *a += b);
            }
        }
        let local_mesh = TimeMesh::with_step(dt, steps)?;
        let window = Window {
            grid,
            mesh: local_mesh,
            start: mesh.node(k0),
            stepper: &stepper,
            bank: bank.as_ref(),
            exo: &exo,
            opts,
            offset: k0,
        };
        let result = picard_window(&window, row0, settings.k_max, settings.tol)?;
        if !result.converged {
            log::warn!(
                "window {} stopped after {} iterates at distance {:.3e}",
                windows + 1,
                result.iterates.len(),
                result.distances.last().copied().unwrap_or(f64::NAN)
            );
        }
        distances.push(result.distances.clone());
        let piece = result
            .iterates
            .into_iter()
            .last()
            .expect("at least one iterate");
        global_specs.truncate(k0);
        for r in piece.rows() {
            global_specs.push(stepper.conv.field_spectrum(r));
        }
        global = Some(match global {
            None => piece,
            Some(g) => g.concatenate(&piece)?,
        });
        k0 += steps;
        windows += 1;
    }
    // the concatenated mesh accumulates dt * steps; pin it to the requested one
    let history = global.expect("at least one window").with_mesh(*mesh);
    Ok(GlobalSolution {
        history,
        window_steps,
        windows,
        picard_distances: distances,
    })
}
