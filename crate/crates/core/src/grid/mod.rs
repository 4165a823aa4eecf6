//! Uniform space and time discretization, the Gaussian heat kernel,
//! quadrature rules and discrete convolution.
//!
//! The real line is replaced by the periodic box `[-L, L)` sampled at `n`
//! points `x_i = -L + i h`, `h = 2L / n`. All spatial integrals use the
//! rectangle rule on that grid (identical to the trapezoid rule for periodic
//! data), so the integral of the constant 1 is exactly `2L`.

mod convolve;
mod heat;
pub mod quad;

pub use convolve::{causal_sum, lagged_sum, Convolver, Spectrum};
pub(crate) use heat::gauss;
pub use heat::{
    heat_cumulative, heat_dx_cumulative, heat_dx_time_integral, heat_kernel, heat_kernel_dx,
    heat_time_integral,
};
pub use quad::{power_cell_averages, singular_time_weights};

use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Result};

/// Smallest admissible number of grid points.
pub const MIN_POINTS: usize = 16;

/// Negative density values above this threshold are treated as roundoff.
pub const DEFAULT_CLIP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    half_width: f64,
    n: usize,
    periodic_wrap: bool,
}

impl Grid1D {
    /// Periodic grid on `[-half_width, half_width)` with `n` points.
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        Self::with_wrap(half_width, n, true)
    }

    /// Grid whose convolutions either wrap periodically or zero-pad.
    pub fn with_wrap(half_width: f64, n: usize, periodic_wrap: bool) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return domain(format!(
                "grid half width must be positive, got {half_width}"
            ));
        }
        if n < MIN_POINTS {
            return domain(format!("grid needs at least {MIN_POINTS} points, got {n}"));
        }
        if !n.is_multiple_of(2) {
            return domain(format!("grid point count must be even, got {n}"));
        }
        Ok(Self {
            half_width,
            n,
            periodic_wrap,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn periodic_wrap(&self) -> bool {
        self.periodic_wrap
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    /// Index of the grid point at the origin.
    pub fn origin_index(&self) -> usize {
        self.n / 2
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.n).map(|i| f(self.point(i))).collect()
    }

    /// Rectangle-rule integral of grid samples.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n);
        self.spacing() * values.iter().sum::<f64>()
    }

    pub fn l1_norm(&self, values: &[f64]) -> f64 {
        self.spacing() * values.iter().map(|v| v.abs()).sum::<f64>()
    }

    pub fn l2_norm(&self, values: &[f64]) -> f64 {
        (self.spacing() * values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn check_len(&self, values: &[f64], what: &str) -> Result<()> {
        if values.len() != self.n {
            return usage(format!(
                "{what} has {} samples but the grid has {} points",
                values.len(),
                self.n
            ));
        }
        Ok(())
    }

    /// Map a position into `[-L, L)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let width = 2.0 * self.half_width;
        (x + self.half_width).rem_euclid(width) - self.half_width
    }

    /// Linear interpolation of grid samples, periodic across the box edge.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        let s = (self.wrap(x) + self.half_width) / self.spacing();
        let i0 = (s.floor() as usize).min(self.n - 1);
        let frac = s - i0 as f64;
        let i1 = (i0 + 1) % self.n;
        values[i0] * (1.0 - frac) + values[i1] * frac
    }

    /// Central first difference with periodic wrap.
    pub fn derivative(&self, values: &[f64]) -> Vec<f64> {
        let n = self.n;
        let inv = 1.0 / (2.0 * self.spacing());
        (0..n)
            .map(|i| (values[(i + 1) % n] - values[(i + n - 1) % n]) * inv)
            .collect()
    }

    /// Central second difference with periodic wrap.
    pub fn second_derivative(&self, values: &[f64]) -> Vec<f64> {
        let n = self.n;
        let inv = 1.0 / (self.spacing() * self.spacing());
        (0..n)
            .map(|i| (values[(i + 1) % n] - 2.0 * values[i] + values[(i + n - 1) % n]) * inv)
            .collect()
    }

    /// Upper bound on the Gaussian mass beyond the box for a centred law of
    /// the given variance, `exp(-L^2 / (2 var))`.
    pub fn gaussian_tail_bound(&self, variance: f64) -> f64 {
        (-self.half_width * self.half_width / (2.0 * variance)).exp()
    }

    /// Aliasing error of a heat kernel of time `t` sampled on this grid,
    /// `exp(-2 pi^2 t / h^2)` (leading Poisson-summation term).
    pub fn aliasing_bound(&self, t: f64) -> f64 {
        let h = self.spacing();
        (-2.0 * std::f64::consts::PI.powi(2) * t / (h * h)).exp()
    }
}

/// Uniform time mesh `t_k = k T / M`, `k = 0..=M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeMesh {
    horizon: f64,
    steps: usize,
}

impl TimeMesh {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return domain(format!("time horizon must be positive, got {horizon}"));
        }
        if steps == 0 {
            return domain("time mesh needs at least one step");
        }
        Ok(Self { horizon, steps })
    }

    /// Mesh with the given step size and `steps` steps.
    pub fn with_step(dt: f64, steps: usize) -> Result<Self> {
        Self::new(dt * steps as f64, steps)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k == self.steps {
            self.horizon
        } else {
            k as f64 * self.dt()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.node(k)).collect()
    }

    /// Mesh with the step halved over the same horizon.
    pub fn refined(&self) -> Self {
        Self {
            horizon: self.horizon,
            steps: 2 * self.steps,
        }
    }

    /// Index of the node closest to `t`.
    pub fn nearest(&self, t: f64) -> usize {
        ((t / self.dt()).round().max(0.0) as usize).min(self.steps)
    }
}

/// Outcome of clipping roundoff negatives from a density.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClipStats {
    /// Number of roundoff negatives set to zero.
    pub clipped: usize,
    /// Most negative value left in place (0 when none).
    pub min_value: f64,
}

/// A probability density sampled on a [`Grid1D`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    pub values: Vec<f64>,
    pub time: f64,
}

impl DensityField {
    pub fn new(values: Vec<f64>, time: f64) -> Self {
        Self { values, time }
    }

    pub fn from_fn(grid: &Grid1D, time: f64, f: impl Fn(f64) -> f64) -> Self {
        Self::new(grid.sample(f), time)
    }

    /// Centred Gaussian-family density `g(variance, x - mean)` on the grid.
    pub fn gaussian(grid: &Grid1D, mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0) {
            return domain(format!(
                "gaussian variance must be positive, got {variance}"
            ));
        }
        Ok(Self::from_fn(grid, 0.0, |x| {
            heat::gauss(variance, x - mean)
        }))
    }

    /// Uniform density on `[a, b]`, with half weight on nodes at the edges.
    pub fn uniform(grid: &Grid1D, a: f64, b: f64) -> Result<Self> {
        if !(b > a) {
            return domain(format!("uniform support needs a < b, got [{a}, {b}]"));
        }
        let tol = 1e-9 * grid.spacing();
        let mut field = Self::from_fn(grid, 0.0, |x| {
            if (x - a).abs() < tol || (x - b).abs() < tol {
                0.5
            } else if x > a && x < b {
                1.0
            } else {
                0.0
            }
        });
        field.normalize(grid)?;
        Ok(field)
    }

    pub fn mass(&self, grid: &Grid1D) -> f64 {
        grid.integrate(&self.values)
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Rescale to unit quadrature mass.
    pub fn normalize(&mut self, grid: &Grid1D) -> Result<f64> {
        let mass = self.mass(grid);
        if !(mass.is_finite() && mass > 0.0) {
            return domain(format!("cannot normalize a density of mass {mass}"));
        }
        let inv = 1.0 / mass;
        self.values.iter_mut().for_each(|v| *v *= inv);
        Ok(mass)
    }

    /// Zero out negatives no deeper than `tol`; deeper ones are kept and reported.
    pub fn clip_negative(&mut self, tol: f64) -> ClipStats {
        clip_negative(&mut self.values, tol)
    }
}

pub(crate) fn clip_negative(values: &mut [f64], tol: f64) -> ClipStats {
    let mut stats = ClipStats::default();
    for v in values.iter_mut() {
        if *v < 0.0 {
            if *v >= -tol {
                *v = 0.0;
                stats.clipped += 1;
            } else {
                stats.min_value = stats.min_value.min(*v);
            }
        }
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(Grid1D::new(1.0, 8).is_err());
        assert!(Grid1D::new(-1.0, 64).is_err());
        assert!(Grid1D::new(1.0, 17).is_err());
    }

    #[test]
    fn constant_integrates_to_box_width() {
        let grid = Grid1D::new(3.7, 96).unwrap();
        let ones = vec![1.0; grid.len()];
        assert!((grid.integrate(&ones) - 7.4).abs() < 1e-14);
        assert_eq!(grid.point(grid.origin_index()), 0.0);
    }

    #[test]
    fn mesh_endpoints_are_exact() {
        let mesh = TimeMesh::new(0.3, 7).unwrap();
        assert_eq!(mesh.node(0), 0.0);
        assert_eq!(mesh.node(7), 0.3);
        assert!(TimeMesh::new(0.0, 4).is_err());
        assert!(TimeMesh::new(1.0, 0).is_err());
    }

    #[test]
    fn interpolation_wraps_periodically() {
        let grid = Grid1D::new(1.0, 16).unwrap();
        let vals: Vec<f64> = (0..16).map(|i| i as f64).collect();
        assert!((grid.interpolate(&vals, grid.point(3)) - 3.0).abs() < 1e-12);
        assert!((grid.interpolate(&vals, grid.point(3) + 2.0) - 3.0).abs() < 1e-12);
        // halfway between the last node and the first (wrapped)
        let x = grid.point(15) + 0.5 * grid.spacing();
        assert!((grid.interpolate(&vals, x) - 7.5).abs() < 1e-12);
    }

    #[test]
    fn clipping_keeps_real_negatives() {
        let mut v = vec![1.0, -1e-14, -1e-3, 0.5];
        let stats = clip_negative(&mut v, DEFAULT_CLIP_TOL);
        assert_eq!(v[1], 0.0);
        assert_eq!(v[2], -1e-3);
        assert_eq!(stats.clipped, 1);
        assert_eq!(stats.min_value, -1e-3);
    }

    #[test]
    fn uniform_density_has_unit_mass() {
        let grid = Grid1D::new(4.0, 256).unwrap();
        let u = DensityField::uniform(&grid, -0.5, 0.5).unwrap();
        assert!((u.mass(&grid) - 1.0).abs() < 1e-14);
        assert!((u.sup() - 1.0).abs() < 1e-12);
    }
}
