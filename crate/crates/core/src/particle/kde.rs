use serde::{Deserialize, Serialize};

use super::ParticleEnsemble;
use crate::error::{domain, Result};
use crate::grid::{gauss, DensityField, Grid1D};

/// `1.06 sigma N^{-1/5}`, with the unbiased sample deviation.
pub fn silverman_bandwidth(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    if x.len() < 2 {
        return 0.0;
    }
    let m = x.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    1.06 * sd * n.powf(-0.2)
}

/// Gaussian kernel density estimate of the positions at step `k`, sampled
/// on `grid` without periodic wrap. Silverman's rule when `bandwidth` is
/// `None`; a degenerate sample falls back to one grid spacing.
pub fn kde_density(
    ensemble: &ParticleEnsemble,
    k: usize,
    grid: &Grid1D,
    bandwidth: Option<f64>,
) -> Result<DensityField> {
    let mut x = ensemble.positions(k)?.to_vec();
    x.sort_by(f64::total_cmp);
    let bw = match bandwidth {
        Some(b) if !(b > 0.0 && b.is_finite()) => {
            return domain(format!("bandwidth must be positive, got {b}"))
        }
        Some(b) => b,
        None => {
            let b = silverman_bandwidth(&x);
            if b > 0.0 {
                b
            } else {
                log::warn!(
                    "degenerate ensemble at step {k}; using a near-delta of width {:e}",
                    grid.spacing()
                );
                grid.spacing()
            }
        }
    };
    let var = bw * bw;
    let reach = 10.0 * bw;
    let inv_n = 1.0 / x.len() as f64;
    let values = grid.sample(|p| {
        let lo = x.partition_point(|&v| v < p - reach);
        let hi = x.partition_point(|&v| v <= p + reach);
        inv_n * x[lo..hi].iter().map(|&v| gauss(var, p - v)).sum::<f64>()
    });
    Ok(DensityField::new(values, ensemble.time(k)))
}

/// Normalized histogram with per-bin Monte Carlo standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub centres: Vec<f64>,
    pub density: Vec<f64>,
    pub stderr: Vec<f64>,
    pub samples: usize,
}

impl Histogram {
    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.centres.len() as f64
    }
}

/// Counts over `bins` equal bins of `[lo, hi)` divided by `N * width`;
/// samples outside still count in `N`.
pub fn histogram(x: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Histogram> {
    if !(hi > lo) || bins == 0 || x.is_empty() {
        return domain(format!(
            "histogram needs lo < hi, bins > 0 and samples (got [{lo}, {hi}), {bins} bins)"
        ));
    }
    let w = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in x {
        if v >= lo && v < hi {
            counts[(((v - lo) / w) as usize).min(bins - 1)] += 1;
        }
    }
    let n = x.len() as f64;
    let density = counts.iter().map(|&c| c as f64 / (n * w)).collect();
    let stderr = counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            (p * (1.0 - p) / n).sqrt() / w
        })
        .collect();
    Ok(Histogram {
        lo,
        hi,
        centres: (0..bins).map(|i| lo + (i as f64 + 0.5) * w).collect(),
        density,
        stderr,
        samples: x.len(),
    })
}
