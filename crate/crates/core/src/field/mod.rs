//! The exogenous drift `b(t, x) = chi e^{-lambda t} E c_0'(x + W_t)` and the
//! chemical concentration `c_t` with its gradient.

use std::f64::consts::PI;
use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Result};
use crate::grid::{
    causal_sum, heat_dx_time_integral, heat_time_integral, Convolver, Grid1D, Spectrum,
};
use crate::kernel::KernelSpec;
use crate::mild::MarginalHistory;

/// Closed-form families of initial concentrations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChemicalProfile {
    /// `c_0(x) = amplitude sin(frequency x)`.
    Sine {
        amplitude: f64,
        frequency: f64,
    },
    /// `c_0(x) = amplitude exp(-x^2 / (2 width^2))`.
    GaussianBump {
        amplitude: f64,
        width: f64,
    },
    /// `c_0(x) = -curvature x^2 / 2`, whose drift `-chi curvature x` turns the
    /// dynamics into an Ornstein-Uhlenbeck process.
    Quadratic {
        curvature: f64,
    },
    Constant {
        value: f64,
    },
    /// Grid samples only.
    Samples,
}

/// Initial chemical concentration `c_0` and its derivative on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialChemical {
    grid: Grid1D,
    pub c0: Vec<f64>,
    pub c0_prime: Vec<f64>,
    pub profile: ChemicalProfile,
}

impl InitialChemical {
    fn closed(grid: &Grid1D, profile: ChemicalProfile) -> Result<Self> {
        let (c0, c0_prime) = (
            grid.sample(|x| profile_value(profile, x)),
            grid.sample(|x| profile_slope(profile, x)),
        );
        Self::checked(grid, c0, c0_prime, profile)
    }

    fn checked(
        grid: &Grid1D,
        c0: Vec<f64>,
        c0_prime: Vec<f64>,
        profile: ChemicalProfile,
    ) -> Result<Self> {
        grid.check_len(&c0, "c0")?;
        grid.check_len(&c0_prime, "c0'")?;
        if c0.iter().chain(&c0_prime).any(|v| !v.is_finite()) {
            return domain("initial concentration and its derivative must be finite");
        }
        Ok(Self {
            grid: *grid,
            c0,
            c0_prime,
            profile,
        })
    }

    pub fn sine(grid: &Grid1D, amplitude: f64, frequency: f64) -> Result<Self> {
        Self::closed(
            grid,
            ChemicalProfile::Sine {
                amplitude,
                frequency,
            },
        )
    }

    pub fn gaussian_bump(grid: &Grid1D, amplitude: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return domain(format!("bump width must be positive, got {width}"));
        }
        Self::closed(grid, ChemicalProfile::GaussianBump { amplitude, width })
    }

    pub fn quadratic(grid: &Grid1D, curvature: f64) -> Result<Self> {
        Self::closed(grid, ChemicalProfile::Quadratic { curvature })
    }

    pub fn constant(grid: &Grid1D, value: f64) -> Result<Self> {
        Self::closed(grid, ChemicalProfile::Constant { value })
    }

    /// From samples; the derivative defaults to periodic central differences.
    pub fn from_samples(grid: &Grid1D, c0: Vec<f64>, c0_prime: Option<Vec<f64>>) -> Result<Self> {
        grid.check_len(&c0, "c0")?;
        let c0_prime = c0_prime.unwrap_or_else(|| grid.derivative(&c0));
        Self::checked(grid, c0, c0_prime, ChemicalProfile::Samples)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn sup_prime(&self) -> f64 {
        self.c0_prime.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn sup(&self) -> f64 {
        self.c0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `E c_0(x + W_t)` and `E c_0'(x + W_t)` at one point.
    pub fn smoothed_at(&self, t: f64, x: f64) -> (f64, f64) {
        if let Some(v) = closed_smoothed(self.profile, t, x) {
            return v;
        }
        if t == 0.0 {
            return (
                self.grid.interpolate(&self.c0, x),
                self.grid.interpolate(&self.c0_prime, x),
            );
        }
        let h = self.grid.spacing();
        let (mut c, mut d) = (0.0, 0.0);
        for j in 0..self.grid.len() {
            let w = gauss(t, self.grid.wrap(x - self.grid.point(j)));
            c += self.c0[j] * w;
            d += self.c0_prime[j] * w;
        }
        (h * c, h * d)
    }

    /// `E c_0(x + W_t)` and `E c_0'(x + W_t)` on the grid.
    pub fn smoothed(&self, conv: &Convolver, t: f64) -> (Vec<f64>, Vec<f64>) {
        if !matches!(self.profile, ChemicalProfile::Samples) {
            let pairs: Vec<(f64, f64)> = self
                .grid
                .points()
                .into_iter()
                .map(|x| self.smoothed_at(t, x))
                .collect();
            return pairs.into_iter().unzip();
        }
        if t == 0.0 {
            return (self.c0.clone(), self.c0_prime.clone());
        }
        let spec = conv.kernel_spectrum(&conv.sample_kernel(|x| gauss(t, x)));
        let c = conv.inverse(&conv.field_spectrum(&self.c0).product(&spec));
        let d = conv.inverse(&conv.field_spectrum(&self.c0_prime).product(&spec));
        (c, d)
    }
}

fn gauss(t: f64, x: f64) -> f64 {
    (-x * x / (2.0 * t)).exp() / (2.0 * PI * t).sqrt()
}

fn profile_value(p: ChemicalProfile, x: f64) -> f64 {
    closed_smoothed(p, 0.0, x).map_or(0.0, |v| v.0)
}

fn profile_slope(p: ChemicalProfile, x: f64) -> f64 {
    closed_smoothed(p, 0.0, x).map_or(0.0, |v| v.1)
}

fn closed_smoothed(p: ChemicalProfile, t: f64, x: f64) -> Option<(f64, f64)> {
    Some(match p {
        ChemicalProfile::Sine {
            amplitude,
            frequency,
        } => {
            let damp = amplitude * (-frequency * frequency * t / 2.0).exp();
            (
                damp * (frequency * x).sin(),
                damp * frequency * (frequency * x).cos(),
            )
        }
        ChemicalProfile::GaussianBump { amplitude, width } => {
            let v = width * width + t;
            let c = amplitude * width / v.sqrt() * (-x * x / (2.0 * v)).exp();
            (c, -x / v * c)
        }
        ChemicalProfile::Quadratic { curvature } => {
            (-curvature * (x * x + t) / 2.0, -curvature * x)
        }
        ChemicalProfile::Constant { value } => (value, 0.0),
        ChemicalProfile::Samples => return None,
    })
}

/// A drift `b(t, x)` that does not depend on the unknown law.
pub trait ExogenousDrift: Send + Sync + Debug {
    fn value(&self, t: f64, x: f64) -> f64;

    /// `b(t, .)` on the grid.
    fn sample(&self, grid: &Grid1D, t: f64) -> Vec<f64> {
        grid.sample(|x| self.value(t, x))
    }

    /// Declared bound on `sup |b|`, when known.
    fn sup_bound(&self) -> Option<f64> {
        None
    }
}

/// `b(t, x) = chi e^{-lambda t} E c_0'(x + W_t)`.
#[derive(Debug, Clone)]
pub struct ChemotacticDrift {
    pub chi: f64,
    pub lambda: f64,
    chem: InitialChemical,
    conv: Convolver,
}

impl ChemotacticDrift {
    pub fn new(spec: &KernelSpec, chem: InitialChemical) -> Self {
        Self::with_params(spec.chi, spec.lambda, chem)
    }

    pub fn with_params(chi: f64, lambda: f64, chem: InitialChemical) -> Self {
        let conv = Convolver::new(chem.grid());
        Self {
            chi,
            lambda,
            chem,
            conv,
        }
    }

    pub fn chemical(&self) -> &InitialChemical {
        &self.chem
    }
}

impl ExogenousDrift for ChemotacticDrift {
    fn value(&self, t: f64, x: f64) -> f64 {
        self.chi * (-self.lambda * t).exp() * self.chem.smoothed_at(t, x).1
    }

    fn sample(&self, grid: &Grid1D, t: f64) -> Vec<f64> {
        if grid != self.chem.grid() {
            return ExogenousDrift::sample(&PointwiseOnly(self), grid, t);
        }
        let scale = self.chi * (-self.lambda * t).exp();
        self.chem
            .smoothed(&self.conv, t)
            .1
            .into_iter()
            .map(|v| scale * v)
            .collect()
    }

    fn sup_bound(&self) -> Option<f64> {
        Some(self.chi * self.chem.sup_prime())
    }
}

#[derive(Debug)]
struct PointwiseOnly<'a>(&'a ChemotacticDrift);

impl ExogenousDrift for PointwiseOnly<'_> {
    fn value(&self, t: f64, x: f64) -> f64 {
        self.0.value(t, x)
    }
}

/// A drift given by a closure, with an optional declared sup bound.
#[derive(Clone)]
pub struct FnDrift {
    f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    bound: Option<f64>,
}

impl FnDrift {
    pub fn new(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static, bound: Option<f64>) -> Self {
        Self {
            f: Arc::new(f),
            bound,
        }
    }
}

impl Debug for FnDrift {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnDrift")
            .field("bound", &self.bound)
            .finish()
    }
}

impl ExogenousDrift for FnDrift {
    fn value(&self, t: f64, x: f64) -> f64 {
        (self.f)(t, x)
    }

    fn sup_bound(&self) -> Option<f64> {
        self.bound
    }
}

/// `b(t, x)` for the chemotactic drift of `spec` and `chem`.
pub fn drift_b(spec: &KernelSpec, chem: &InitialChemical, t: f64, x: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return domain(format!("drift needs t >= 0, got {t}"));
    }
    Ok(spec.chi * (-spec.lambda * t).exp() * chem.smoothed_at(t, x).1)
}

/// `c_t` and `dc_t / dx` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChemicalField {
    pub values: Vec<f64>,
    pub gradient: Vec<f64>,
    pub time: f64,
}

/// Lag banks of `int e^{-lambda u} g(u, .) du` and of its `x`-derivative over
/// `[(j-1) dt, j dt]`, applied to the history frozen at left nodes.
struct Duhamel {
    conv: Convolver,
    heat: Vec<Spectrum>,
    grad: Vec<Spectrum>,
    rows: Vec<Spectrum>,
}

impl Duhamel {
    fn new(history: &MarginalHistory, lambda: f64, lags: usize) -> Self {
        let conv = Convolver::new(history.grid());
        let dt = history.mesh().dt();
        let span = |j: usize| ((j - 1) as f64 * dt, j as f64 * dt);
        let heat = conv.lag_bank(lags, |j, x| {
            let (a, b) = span(j);
            heat_time_integral(a, b, lambda, x)
        });
        let grad = conv.lag_bank(lags, |j, x| {
            let (a, b) = span(j);
            heat_dx_time_integral(a, b, lambda, x)
        });
        let rows = history.rows()[..lags]
            .iter()
            .map(|r| conv.field_spectrum(r))
            .collect();
        Self {
            conv,
            heat,
            grad,
            rows,
        }
    }

    fn at(&self, k: usize) -> (Vec<f64>, Vec<f64>) {
        if k == 0 {
            let n = self.conv.grid().len();
            return (vec![0.0; n], vec![0.0; n]);
        }
        let c = self.conv.inverse(&causal_sum(&self.heat, &self.rows, k));
        let d = self.conv.inverse(&causal_sum(&self.grad, &self.rows, k));
        (c, d)
    }
}

fn check_inputs(history: &MarginalHistory, chem: &InitialChemical, k: usize) -> Result<()> {
    if history.grid() != chem.grid() {
        return usage("history and initial concentration live on different grids");
    }
    if k > history.mesh().steps() {
        return usage(format!(
            "step {k} is beyond the mesh ({} steps)",
            history.mesh().steps()
        ));
    }
    if k > 0 && history.len() < k {
        return usage(format!(
            "the concentration at step {k} needs rows 0..{k} but only {} are populated",
            history.len()
        ));
    }
    Ok(())
}

fn assemble(
    chem: &InitialChemical,
    conv: &Convolver,
    lambda: f64,
    t: f64,
    duhamel: (Vec<f64>, Vec<f64>),
) -> ChemicalField {
    let (c_hom, d_hom) = chem.smoothed(conv, t);
    let damp = (-lambda * t).exp();
    let values = c_hom
        .iter()
        .zip(&duhamel.0)
        .map(|(a, b)| damp * a + b)
        .collect();
    let gradient = d_hom
        .iter()
        .zip(&duhamel.1)
        .map(|(a, b)| damp * a + b)
        .collect();
    ChemicalField {
        values,
        gradient,
        time: t,
    }
}

/// `c_{t_k} = e^{-lambda t} g(t) * c_0 + int_0^t e^{-lambda (t-s)} g(t-s) * rho_s ds`
/// with `rho` frozen at the left node of each mesh subinterval and the time
/// integral of the heat kernel taken exactly.
pub fn chemical_concentration(
    history: &MarginalHistory,
    chem: &InitialChemical,
    lambda: f64,
    k: usize,
) -> Result<ChemicalField> {
    check_inputs(history, chem, k)?;
    let duhamel = Duhamel::new(history, lambda, k);
    let t = history.mesh().node(k);
    Ok(assemble(chem, &duhamel.conv, lambda, t, duhamel.at(k)))
}

/// `dc_{t_k} / dx`, discretized as in [`chemical_concentration`].
pub fn chemical_gradient(
    history: &MarginalHistory,
    chem: &InitialChemical,
    spec: &KernelSpec,
    k: usize,
) -> Result<Vec<f64>> {
    Ok(chemical_concentration(history, chem, spec.lambda, k)?.gradient)
}

/// The chemical field at every populated mesh node.
pub fn chemical_history(
    history: &MarginalHistory,
    chem: &InitialChemical,
    lambda: f64,
) -> Result<Vec<ChemicalField>> {
    let last = history.len() - 1;
    check_inputs(history, chem, last)?;
    let duhamel = Duhamel::new(history, lambda, last);
    Ok((0..=last)
        .map(|k| {
            assemble(
                chem,
                &duhamel.conv,
                lambda,
                history.mesh().node(k),
                duhamel.at(k),
            )
        })
        .collect())
}

/// Finite-difference residual of `dc/dt = c''/2 - lambda c + rho`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    /// Space-time `L^2` norm.
    pub l2: f64,
    /// Spatial `L^2` norm at each half step.
    pub per_step: Vec<f64>,
}

/// Residual at the midpoints `t_{k+1/2}`: the time difference of `c` minus
/// the averaged right-hand side. Interior nodes only, since `c_0` need not
/// be periodic on the box.
pub fn ks_residual(
    history: &MarginalHistory,
    fields: &[ChemicalField],
    lambda: f64,
) -> Result<Residual> {
    if fields.len() != history.len() || fields.len() < 2 {
        return usage(format!(
            "residual needs one field per history row ({} fields, {} rows)",
            fields.len(),
            history.len()
        ));
    }
    let grid = history.grid();
    let (dt, h) = (history.mesh().dt(), grid.spacing());
    let n = grid.len();
    let mut per_step = Vec::with_capacity(fields.len() - 1);
    let mut total = 0.0;
    for k in 0..fields.len() - 1 {
        let (c0, c1) = (&fields[k].values, &fields[k + 1].values);
        let mid: Vec<f64> = c0.iter().zip(c1).map(|(a, b)| 0.5 * (a + b)).collect();
        let (r0, r1) = (&history.rows()[k], &history.rows()[k + 1]);
        let sq: f64 = (1..n - 1)
            .map(|i| {
                let lap = (mid[i + 1] - 2.0 * mid[i] + mid[i - 1]) / (h * h);
                let r = (c1[i] - c0[i]) / dt - 0.5 * lap + lambda * mid[i] - 0.5 * (r0[i] + r1[i]);
                r * r
            })
            .sum();
        let norm = (h * sq).sqrt();
        total += dt * norm * norm;
        per_step.push(norm);
    }
    Ok(Residual {
        l2: total.sqrt(),
        per_step,
    })
}

/// Empirical constant in `||c_t||_inf <= ||c_0||_inf + C_T`.
pub fn sup_growth(chem: &InitialChemical, fields: &[ChemicalField]) -> f64 {
    let base = chem.sup();
    fields
        .iter()
        .map(|f| f.values.iter().fold(0.0_f64, |m, v| m.max(v.abs())) - base)
        .fold(0.0_f64, f64::max)
}
