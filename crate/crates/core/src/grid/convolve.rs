use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::Grid1D;
use crate::error::Result;

/// Discrete Fourier coefficients of a field or kernel on a [`Convolver`]'s
/// transform length.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum(pub Vec<Complex64>);

impl Spectrum {
    pub fn zeros(len: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `self += a * b` pointwise.
    pub fn add_product(&mut self, a: &Spectrum, b: &Spectrum) {
        for ((s, x), y) in self.0.iter_mut().zip(&a.0).zip(&b.0) {
            *s += x * y;
        }
    }

    pub fn add_scaled(&mut self, a: &Spectrum, scale: f64) {
        for (s, x) in self.0.iter_mut().zip(&a.0) {
            *s += x * scale;
        }
    }

    pub fn product(&self, other: &Spectrum) -> Spectrum {
        Spectrum(self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect())
    }
}

/// `sum_{l<k} rows[l] * bank[k - l - 1]`, i.e. the causal memory sum at step
/// `k` when `bank[j - 1]` holds lag `j`.
pub fn causal_sum(bank: &[Spectrum], rows: &[Spectrum], k: usize) -> Spectrum {
    lagged_sum(bank, &rows[..k], k)
}

/// `sum_l rows[l] * bank[k - l - 1]` over all given rows (`rows.len() <= k`).
/// Each frequency is summed in the order of `l`, so the result does not
/// depend on the thread count.
pub fn lagged_sum(bank: &[Spectrum], rows: &[Spectrum], k: usize) -> Spectrum {
    debug_assert!(rows.len() <= k);
    let len = bank.first().map_or(0, |r| r.len());
    let mut out = Spectrum::zeros(len);
    out.0
        .par_chunks_mut(256)
        .enumerate()
        .for_each(|(c, chunk)| {
            let base = c * 256;
            for (l, row) in rows.iter().enumerate() {
                let (r, b) = (&row.0[base..], &bank[k - l - 1].0[base..]);
                for (i, o) in chunk.iter_mut().enumerate() {
                    *o += r[i] * b[i];
                }
            }
        });
    out
}

/// Discrete convolution on a [`Grid1D`]:
/// `(f * k)(x_i) = h sum_j f(x_j) k(x_i - x_j)`.
///
/// Kernels are stored in *lag layout*: entry `m` holds the kernel at lag
/// `m h` for `m < len/2` and at lag `(m - len) h` above. With periodic wrap
/// the transform length is `n` and the unpaired lag `-L` holds the average of
/// the kernel at `-L` and `+L`; otherwise fields are zero-padded to `2n`.
#[derive(Clone)]
pub struct Convolver {
    grid: Grid1D,
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Convolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Convolver")
            .field("grid", &self.grid)
            .field("len", &self.len)
            .finish()
    }
}

impl Convolver {
    pub fn new(grid: &Grid1D) -> Self {
        let len = if grid.periodic_wrap() {
            grid.len()
        } else {
            2 * grid.len()
        };
        let mut planner = FftPlanner::new();
        Self {
            grid: *grid,
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Transform length.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Lag of lag-layout entry `m`, in units of `h`.
    pub fn lag_index(&self, m: usize) -> isize {
        if m < self.len / 2 {
            m as isize
        } else {
            m as isize - self.len as isize
        }
    }

    /// Sample a kernel in lag layout.
    pub fn sample_kernel(&self, f: impl Fn(f64) -> f64 + Sync) -> Vec<f64> {
        let h = self.grid.spacing();
        let half = self.len / 2;
        let periodic = self.grid.periodic_wrap();
        let l = self.grid.half_width();
        (0..self.len)
            .into_par_iter()
            .map(|m| {
                if periodic && m == half {
                    0.5 * (f(-l) + f(l))
                } else {
                    f(self.lag_index(m) as f64 * h)
                }
            })
            .collect()
    }

    /// Convert grid-centred samples `k(x_j)` into lag layout.
    pub fn centred_to_lag(&self, centred: &[f64]) -> Vec<f64> {
        let n = self.grid.len();
        let half = n / 2;
        let mut lag = vec![0.0; self.len];
        for (j, &v) in centred.iter().enumerate() {
            let offset = j as isize - half as isize;
            let m = offset.rem_euclid(self.len as isize) as usize;
            lag[m] = v;
        }
        lag
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(data, &mut scratch);
    }

    /// Spectrum of a grid field (zero-padded when not periodic).
    pub fn field_spectrum(&self, field: &[f64]) -> Spectrum {
        let mut data = vec![Complex64::new(0.0, 0.0); self.len];
        for (d, &v) in data.iter_mut().zip(field) {
            d.re = v;
        }
        self.transform(&mut data, &self.forward);
        Spectrum(data)
    }

    /// Spectrum of a lag-layout kernel, pre-scaled by `h / len` so that
    /// [`Convolver::inverse`] of a product is the convolution.
    pub fn kernel_spectrum(&self, lag_kernel: &[f64]) -> Spectrum {
        let scale = self.grid.spacing() / self.len as f64;
        let mut data: Vec<Complex64> = lag_kernel
            .iter()
            .map(|&v| Complex64::new(v * scale, 0.0))
            .collect();
        data.resize(self.len, Complex64::new(0.0, 0.0));
        self.transform(&mut data, &self.forward);
        Spectrum(data)
    }

    /// Back to a grid field (the first `n` samples).
    pub fn inverse(&self, spectrum: &Spectrum) -> Vec<f64> {
        let mut data = spectrum.0.clone();
        self.transform(&mut data, &self.inverse);
        data.truncate(self.grid.len());
        data.into_iter().map(|c| c.re).collect()
    }

    /// Convolve a field with a lag-layout kernel through the FFT.
    pub fn convolve_lag(&self, field: &[f64], lag_kernel: &[f64]) -> Vec<f64> {
        let product = self
            .field_spectrum(field)
            .product(&self.kernel_spectrum(lag_kernel));
        self.inverse(&product)
    }

    /// Same as [`Convolver::convolve_lag`] by the `O(n^2)` direct sum.
    pub fn convolve_lag_direct(&self, field: &[f64], lag_kernel: &[f64]) -> Vec<f64> {
        let n = self.grid.len();
        let len = self.len;
        let h = self.grid.spacing();
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = 0.0;
                for (j, &f) in field.iter().enumerate() {
                    let m = (i + len - j) % len;
                    acc += f * lag_kernel[m];
                }
                h * acc
            })
            .collect()
    }

    /// Convolve `f` with a kernel sampled at the grid points (centred at
    /// the origin node).
    pub fn convolve(&self, f: &[f64], g_samples: &[f64]) -> Result<Vec<f64>> {
        self.grid.check_len(f, "field")?;
        self.grid.check_len(g_samples, "kernel samples")?;
        Ok(self.convolve_lag(f, &self.centred_to_lag(g_samples)))
    }

    /// Spectra of lag kernels `1..=count`, lag `j` sampled from `f(j, x)`.
    pub fn lag_bank(&self, count: usize, f: impl Fn(usize, f64) -> f64 + Sync) -> Vec<Spectrum> {
        (1..=count)
            .map(|j| self.kernel_spectrum(&self.sample_kernel(|x| f(j, x))))
            .collect()
    }

    pub fn convolve_direct(&self, f: &[f64], g_samples: &[f64]) -> Result<Vec<f64>> {
        self.grid.check_len(f, "field")?;
        self.grid.check_len(g_samples, "kernel samples")?;
        Ok(self.convolve_lag_direct(f, &self.centred_to_lag(g_samples)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::heat::gauss;
    use proptest::prelude::*;

    fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
        let scale = a
            .iter()
            .chain(b)
            .fold(0.0_f64, |m, v| m.max(v.abs()))
            .max(1e-300);
        a.iter()
            .zip(b)
            .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
            / scale
    }

    #[test]
    fn delta_reproduces_kernel() {
        let grid = Grid1D::new(5.0, 64).unwrap();
        let conv = Convolver::new(&grid);
        let h = grid.spacing();
        let mut delta = vec![0.0; 64];
        delta[40] = 1.0 / h;
        let g = grid.sample(|x| gauss(0.3, x));
        let out = conv.convolve(&delta, &g).unwrap();
        // shifted so the kernel's centre sits at node 40
        for i in 0..64 {
            let j = (i + 64 - 40 + 32) % 64;
            assert!((out[i] - g[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn gaussian_semigroup_on_grid() {
        let grid = Grid1D::new(12.0, 512).unwrap();
        let conv = Convolver::new(&grid);
        let (s, t) = (0.4, 0.9);
        let a = grid.sample(|x| gauss(s, x));
        let b = grid.sample(|x| gauss(t, x));
        let out = conv.convolve(&a, &b).unwrap();
        let exact = grid.sample(|x| gauss(s + t, x));
        let tail = (-144.0 / (2.0 * (s + t))).exp();
        let h = grid.spacing();
        assert!(rel_diff(&out, &exact) < h * h + tail + 1e-12);
    }

    #[test]
    fn mass_is_multiplicative() {
        let grid = Grid1D::new(10.0, 256).unwrap();
        let conv = Convolver::new(&grid);
        let f = grid.sample(|x| 2.0 * gauss(0.5, x - 1.0));
        let g = grid.sample(|x| 0.7 * gauss(1.5, x + 0.5));
        let out = conv.convolve(&f, &g).unwrap();
        let lhs = grid.integrate(&out);
        let rhs = grid.integrate(&f) * grid.integrate(&g);
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn size_mismatch_is_a_usage_error() {
        let grid = Grid1D::new(1.0, 32).unwrap();
        let conv = Convolver::new(&grid);
        assert!(conv.convolve(&[0.0; 31], &[0.0; 32]).is_err());
    }

    #[test]
    fn zero_padded_convolution_does_not_wrap() {
        let grid = Grid1D::with_wrap(4.0, 64, false).unwrap();
        let conv = Convolver::new(&grid);
        let h = grid.spacing();
        let mut delta = vec![0.0; 64];
        delta[63] = 1.0 / h;
        let ones = vec![1.0; 64];
        let out = conv.convolve(&delta, &ones).unwrap();
        // node 0 sits 63 cells away, beyond the kernel's lag range
        assert!(out[0].abs() < 1e-14);
        assert!((out[40] - 1.0).abs() < 1e-12);
        let direct = conv.convolve_direct(&delta, &ones).unwrap();
        assert!(rel_diff(&out, &direct) < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn fft_matches_direct(
            exp in 4u32..=12,
            seed in any::<u64>(),
            periodic in any::<bool>(),
        ) {
            let n = 1usize << exp;
            let grid = Grid1D::with_wrap(3.0, n, periodic).unwrap();
            let conv = Convolver::new(&grid);
            let mut state = seed | 1;
            let mut next = || {
                state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            };
            let f: Vec<f64> = (0..n).map(|_| next()).collect();
            let g: Vec<f64> = (0..n).map(|_| next()).collect();
            let fast = conv.convolve(&f, &g).unwrap();
            let slow = conv.convolve_direct(&f, &g).unwrap();
            prop_assert!(rel_diff(&fast, &slow) < 1e-12);
        }
    }
}
