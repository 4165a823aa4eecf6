//! Interacting particles for the nonlinear SDE, where each particle feels
//! the kernel integrated against the empirical measure of every particle's
//! past, plus independent bounded-drift paths and density reconstruction.

mod kde;
mod rng;

pub use kde::{histogram, kde_density, silverman_bandwidth, Histogram};
pub use rng::ParticleStream;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Result};
use crate::field::ExogenousDrift;
use crate::grid::{Convolver, DensityField, Grid1D, Spectrum, TimeMesh};
use crate::mild::{MemoryKernelBank, Model};

/// How row 0 was drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMethod {
    BoxMuller,
    InverseCdf,
    Deterministic,
}

/// Law of the initial positions.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialLaw {
    Gaussian {
        mean: f64,
        variance: f64,
    },
    Uniform {
        a: f64,
        b: f64,
    },
    Point {
        x: f64,
    },
    /// Piecewise constant on the grid cells, sampled by inverse CDF.
    Tabulated {
        grid: Grid1D,
        values: Vec<f64>,
        cdf: Vec<f64>,
    },
}

impl InitialLaw {
    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0 && mean.is_finite()) {
            return domain(format!(
                "gaussian law needs a finite mean and positive variance, got {mean}, {variance}"
            ));
        }
        Ok(Self::Gaussian { mean, variance })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(b > a && a.is_finite() && b.is_finite()) {
            return domain(format!("uniform law needs a < b, got [{a}, {b}]"));
        }
        Ok(Self::Uniform { a, b })
    }

    pub fn point(x: f64) -> Self {
        Self::Point { x }
    }

    /// From grid samples of a density (renormalized).
    pub fn tabulated(grid: &Grid1D, values: Vec<f64>) -> Result<Self> {
        grid.check_len(&values, "initial density")?;
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return domain("tabulated density must be finite and non-negative");
        }
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = values
            .iter()
            .map(|v| {
                acc += v;
                acc
            })
            .collect();
        if !(acc > 0.0) {
            return domain("tabulated density has zero mass");
        }
        cdf.iter_mut().for_each(|c| *c /= acc);
        Ok(Self::Tabulated {
            grid: *grid,
            values,
            cdf,
        })
    }

    pub fn method(&self) -> SamplingMethod {
        match self {
            Self::Gaussian { .. } => SamplingMethod::BoxMuller,
            Self::Uniform { .. } | Self::Tabulated { .. } => SamplingMethod::InverseCdf,
            Self::Point { .. } => SamplingMethod::Deterministic,
        }
    }

    pub fn sample(&self, s: &mut ParticleStream) -> f64 {
        match self {
            Self::Gaussian { mean, variance } => mean + variance.sqrt() * s.normal(),
            Self::Uniform { a, b } => a + (b - a) * (1.0 - s.uniform()),
            Self::Point { x } => *x,
            Self::Tabulated { grid, cdf, .. } => {
                let u = s.uniform();
                let i = cdf.partition_point(|&c| c < u).min(cdf.len() - 1);
                let below = if i == 0 { 0.0 } else { cdf[i - 1] };
                let width = cdf[i] - below;
                let frac = if width > 0.0 {
                    (u - below) / width
                } else {
                    0.5
                };
                grid.point(i) + (frac - 0.5) * grid.spacing()
            }
        }
    }

    /// The law as a density on `grid` (a point mass becomes one cell).
    pub fn density(&self, grid: &Grid1D) -> Result<DensityField> {
        match self {
            Self::Gaussian { mean, variance } => DensityField::gaussian(grid, *mean, *variance),
            Self::Uniform { a, b } => DensityField::uniform(grid, *a, *b),
            Self::Point { x } => {
                let mut v = vec![0.0; grid.len()];
                let s = ((grid.wrap(*x) + grid.half_width()) / grid.spacing()).round() as usize
                    % grid.len();
                v[s] = 1.0 / grid.spacing();
                Ok(DensityField::new(v, 0.0))
            }
            Self::Tabulated {
                grid: g, values, ..
            } => {
                if g != grid {
                    return usage("tabulated law lives on a different grid");
                }
                let mut d = DensityField::new(values.clone(), 0.0);
                d.normalize(grid)?;
                Ok(d)
            }
        }
    }
}

/// Positions of `N` particles at recorded mesh steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleEnsemble {
    seed: u64,
    mesh: TimeMesh,
    steps: Vec<usize>,
    rows: Vec<Vec<f64>>,
    sampling: SamplingMethod,
    streams: Vec<u64>,
    /// Pairwise kernel evaluations (direct interaction) or lag products
    /// (binned), for throughput reports.
    pub work: u64,
}

impl ParticleEnsemble {
    pub fn len(&self) -> usize {
        self.streams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.streams.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mesh(&self) -> &TimeMesh {
        &self.mesh
    }

    pub fn sampling(&self) -> SamplingMethod {
        self.sampling
    }

    pub fn streams(&self) -> &[u64] {
        &self.streams
    }

    pub fn recorded_steps(&self) -> &[usize] {
        &self.steps
    }

    pub fn time(&self, k: usize) -> f64 {
        self.mesh.node(k)
    }

    pub fn positions(&self, k: usize) -> Result<&[f64]> {
        match self.steps.binary_search(&k) {
            Ok(r) => Ok(&self.rows[r]),
            Err(_) => usage(format!("step {k} was not recorded")),
        }
    }

    pub fn mean(&self, k: usize) -> Result<f64> {
        let x = self.positions(k)?;
        Ok(x.iter().sum::<f64>() / x.len() as f64)
    }

    /// Unbiased sample variance.
    pub fn variance(&self, k: usize) -> Result<f64> {
        let x = self.positions(k)?;
        let m = x.iter().sum::<f64>() / x.len() as f64;
        Ok(x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0))
    }
}

/// Evaluation of the memory term.
#[derive(Debug, Clone, PartialEq)]
pub enum Interaction {
    /// Every pair and every past step: `Theta(N^2 k)` at step `k`.
    Direct,
    /// Past positions deposited on `grid` by cloud-in-cell, memory computed
    /// by the FFT lag bank of the mild solver and interpolated back.
    Binned(Grid1D),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleOptions {
    pub interaction: Interaction,
    /// Keep only every `s`-th past step beyond the `s` most recent ones,
    /// reweighted by `s` (direct interaction only).
    pub thin: Option<usize>,
    /// Noise stream id per particle; `0..N` when absent.
    pub streams: Option<Vec<u64>>,
}

impl Default for ParticleOptions {
    fn default() -> Self {
        Self {
            interaction: Interaction::Direct,
            thin: None,
            streams: None,
        }
    }
}

fn stream_ids(n: usize, given: &Option<Vec<u64>>) -> Result<Vec<u64>> {
    match given {
        Some(s) if s.len() != n => usage(format!("{} stream ids for {n} particles", s.len())),
        Some(s) => Ok(s.clone()),
        None => Ok((0..n as u64).collect()),
    }
}

fn initial_streams(seed: u64, ids: &[u64], law: &InitialLaw) -> (Vec<ParticleStream>, Vec<f64>) {
    ids.par_iter()
        .map(|&id| {
            let mut s = ParticleStream::new(seed, id);
            let x = law.sample(&mut s);
            s.seek(1);
            (s, x)
        })
        .unzip()
}

fn sorted(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Cloud-in-cell density of `sorted_x` (summed in sorted order).
fn deposit(grid: &Grid1D, sorted_x: &[f64]) -> Vec<f64> {
    let (n, h, l) = (grid.len(), grid.spacing(), grid.half_width());
    let w = 1.0 / (sorted_x.len() as f64 * h);
    let mut rho = vec![0.0; n];
    for &x in sorted_x {
        let s = (grid.wrap(x) + l) / h;
        let i0 = (s.floor() as usize).min(n - 1);
        let frac = s - i0 as f64;
        rho[i0] += w * (1.0 - frac);
        rho[(i0 + 1) % n] += w * frac;
    }
    rho
}

/// Euler-Maruyama for `N` interacting particles:
/// `X^i_{k+1} = X^i_k + dt b(t_k, X^i_k) + (1/N) sum_j sum_{l<k} KK_{k-l}(X^i_k - X^j_l) + sqrt(dt) xi^i_k`,
/// with `KK_j` the kernel integrated over `[(j-1) dt, j dt]`, the same lag
/// weights as the mild solver's memory term.
pub fn simulate_particles(
    n: usize,
    p0: &InitialLaw,
    model: &Model,
    mesh: &TimeMesh,
    seed: u64,
    opts: &ParticleOptions,
) -> Result<ParticleEnsemble> {
    if n < 2 {
        return usage(format!("need at least 2 particles, got {n}"));
    }
    if let Some(0) = opts.thin {
        return usage("thinning stride must be positive");
    }
    let ids = stream_ids(n, &opts.streams)?;
    let (mut streams, x0) = initial_streams(seed, &ids, p0);
    let (m, dt) = (mesh.steps(), mesh.dt());
    let sq = dt.sqrt();
    let mut rows = Vec::with_capacity(m + 1);
    rows.push(x0);

    let binned = match &opts.interaction {
        Interaction::Binned(grid) => model.kernel.as_ref().map(|k| {
            let bank = MemoryKernelBank::new(k.as_ref(), grid, dt, m);
            (*grid, bank)
        }),
        Interaction::Direct => None,
    };
    let conv = binned.as_ref().map(|(g, _)| Convolver::new(g));
    let mut spectra: Vec<Spectrum> = Vec::new();
    let mut past: Vec<Vec<f64>> = Vec::new();
    let mut work = 0u64;
    let inv_n = 1.0 / n as f64;

    for k in 0..m {
        let t = mesh.node(k);
        let x = rows.last().expect("row 0").clone();
        let memory: Option<Vec<f64>> = match (&model.kernel, &binned, &conv) {
            (None, _, _) => None,
            (Some(_), Some((grid, bank)), Some(conv)) => {
                spectra.push(conv.field_spectrum(&deposit(grid, &sorted(&x))));
                if k == 0 {
                    None
                } else {
                    work += (k * grid.len()) as u64;
                    let field = bank.memory(&spectra, k);
                    Some(
                        x.par_iter()
                            .map(|&xi| grid.interpolate(&field, xi))
                            .collect(),
                    )
                }
            }
            (Some(kernel), _, _) => {
                past.push(sorted(&x));
                if k == 0 {
                    None
                } else {
                    let lags: Vec<(usize, f64)> = (0..k)
                        .filter_map(|l| {
                            let j = k - l;
                            match opts.thin {
                                Some(s) if j > s => (l % s == 0).then_some((l, s as f64)),
                                _ => Some((l, 1.0)),
                            }
                        })
                        .collect();
                    work += (lags.len() * n * n) as u64;
                    let (a, b): (Vec<f64>, Vec<f64>) = lags
                        .iter()
                        .map(|&(l, _)| ((k - l - 1) as f64 * dt, (k - l) as f64 * dt))
                        .unzip();
                    Some(
                        x.par_iter()
                            .map(|&xi| {
                                let mut total = 0.0;
                                for (q, &(l, w)) in lags.iter().enumerate() {
                                    let s: f64 = past[l]
                                        .iter()
                                        .map(|&y| kernel.time_integral(a[q], b[q], xi - y))
                                        .sum();
                                    total += w * s;
                                }
                                inv_n * total
                            })
                            .collect(),
                    )
                }
            }
        };
        let next: Vec<f64> = streams
            .par_iter_mut()
            .enumerate()
            .map(|(i, s)| {
                let mut u = model.drift.as_ref().map_or(0.0, |d| d.value(t, x[i]));
                if let Some(mem) = &memory {
                    u += mem[i];
                }
                x[i] + dt * u + sq * s.normal()
            })
            .collect();
        rows.push(next);
    }
    Ok(ParticleEnsemble {
        seed,
        mesh: *mesh,
        steps: (0..=m).collect(),
        rows,
        sampling: p0.method(),
        streams: ids,
        work,
    })
}

/// Independent Euler-Maruyama paths of `dX = b(t, X) dt + dW`. Only the
/// steps in `record` are kept (all of them when `None`). The drift must
/// declare its bound.
pub fn simulate_bounded_drift(
    drift: &dyn ExogenousDrift,
    x0: &InitialLaw,
    mesh: &TimeMesh,
    n: usize,
    seed: u64,
    record: Option<&[usize]>,
) -> Result<ParticleEnsemble> {
    let Some(beta) = drift.sup_bound() else {
        return usage("bounded-drift simulation needs a declared bound on |b|");
    };
    if !beta.is_finite() {
        return domain(format!("drift bound must be finite, got {beta}"));
    }
    if n == 0 {
        return usage("need at least one path");
    }
    let m = mesh.steps();
    let mut steps: Vec<usize> = match record {
        Some(r) => r.to_vec(),
        None => (0..=m).collect(),
    };
    steps.sort_unstable();
    steps.dedup();
    if let Some(&last) = steps.last() {
        if last > m {
            return usage(format!(
                "recorded step {last} is beyond the mesh ({m} steps)"
            ));
        }
    }
    let (dt, sq) = (mesh.dt(), mesh.dt().sqrt());
    let ids: Vec<u64> = (0..n as u64).collect();
    let paths: Vec<Vec<f64>> = ids
        .par_iter()
        .map(|&id| {
            let mut s = ParticleStream::new(seed, id);
            let mut x = x0.sample(&mut s);
            s.seek(1);
            let mut out = Vec::with_capacity(steps.len());
            let mut next = 0;
            for k in 0..=m {
                if next < steps.len() && steps[next] == k {
                    out.push(x);
                    next += 1;
                }
                if k < m {
                    x += dt * drift.value(mesh.node(k), x) + sq * s.normal();
                }
            }
            out
        })
        .collect();
    let rows = (0..steps.len())
        .map(|r| paths.iter().map(|p| p[r]).collect())
        .collect();
    Ok(ParticleEnsemble {
        seed,
        mesh: *mesh,
        steps,
        rows,
        sampling: x0.method(),
        streams: ids,
        work: 0,
    })
}
