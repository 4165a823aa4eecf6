use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::grid::{ClipStats, DensityField, Grid1D, TimeMesh};

/// The family `(p_{t_k})` on a mesh: row `k` is the density at
/// `start + t_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalHistory {
    grid: Grid1D,
    mesh: TimeMesh,
    start: f64,
    rows: Vec<Vec<f64>>,
    /// Mass of each row before renormalization.
    mass_log: Vec<f64>,
    clip_log: Vec<ClipStats>,
}

impl MarginalHistory {
    /// A history holding only `p0`.
    pub fn new(grid: &Grid1D, mesh: &TimeMesh, p0: &DensityField) -> Result<Self> {
        Self::starting_at(grid, mesh, 0.0, p0.values.clone())
    }

    pub(crate) fn starting_at(
        grid: &Grid1D,
        mesh: &TimeMesh,
        start: f64,
        row0: Vec<f64>,
    ) -> Result<Self> {
        grid.check_len(&row0, "initial density")?;
        let mass = grid.integrate(&row0);
        Ok(Self {
            grid: *grid,
            mesh: *mesh,
            start,
            rows: vec![row0],
            mass_log: vec![mass],
            clip_log: vec![ClipStats::default()],
        })
    }

    /// Build a history from given rows (row 0 first).
    pub fn from_rows(grid: &Grid1D, mesh: &TimeMesh, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() || rows.len() > mesh.steps() + 1 {
            return usage(format!(
                "history needs between 1 and {} rows, got {}",
                mesh.steps() + 1,
                rows.len()
            ));
        }
        for r in &rows {
            grid.check_len(r, "history row")?;
        }
        let mass_log = rows.iter().map(|r| grid.integrate(r)).collect();
        let clip_log = vec![ClipStats::default(); rows.len()];
        Ok(Self {
            grid: *grid,
            mesh: *mesh,
            start: 0.0,
            rows,
            mass_log,
            clip_log,
        })
    }

    pub(crate) fn with_mesh(mut self, mesh: TimeMesh) -> Self {
        debug_assert_eq!(mesh.steps() + 1, self.rows.len());
        self.mesh = mesh;
        self
    }

    pub(crate) fn push(&mut self, row: Vec<f64>, mass_before: f64, clip: ClipStats) {
        debug_assert_eq!(row.len(), self.grid.len());
        self.rows.push(row);
        self.mass_log.push(mass_before);
        self.clip_log.push(clip);
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn mesh(&self) -> &TimeMesh {
        &self.mesh
    }

    /// Time of row 0.
    pub fn start(&self) -> f64 {
        self.start
    }

    /// Absolute time of row `k`.
    pub fn time(&self, k: usize) -> f64 {
        self.start + self.mesh.node(k)
    }

    /// Number of populated rows.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.rows.len() == self.mesh.steps() + 1
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, k: usize) -> Result<&[f64]> {
        match self.rows.get(k) {
            Some(r) => Ok(r),
            None => usage(format!(
                "row {k} requested but only {} rows are populated",
                self.rows.len()
            )),
        }
    }

    pub fn last(&self) -> &[f64] {
        self.rows.last().expect("history has a row 0")
    }

    pub fn density(&self, k: usize) -> Result<DensityField> {
        Ok(DensityField::new(self.row(k)?.to_vec(), self.time(k)))
    }

    pub fn mass_log(&self) -> &[f64] {
        &self.mass_log
    }

    pub fn clip_log(&self) -> &[ClipStats] {
        &self.clip_log
    }

    /// Largest `|mass - 1|` before renormalization over all rows.
    pub fn max_mass_drift(&self) -> f64 {
        self.mass_log
            .iter()
            .fold(0.0_f64, |m, v| m.max((v - 1.0).abs()))
    }

    /// `sqrt(t_k) ||p_{t_k}||_inf` per row.
    pub fn linf_scaling(&self) -> Vec<f64> {
        (0..self.rows.len())
            .map(|k| self.time(k).sqrt() * self.rows[k].iter().fold(0.0_f64, |m, v| m.max(v.abs())))
            .collect()
    }

    /// `t_k^{1/4} ||p_{t_k}||_{L^2}` per row.
    pub fn l2_scaling(&self) -> Vec<f64> {
        (0..self.rows.len())
            .map(|k| self.time(k).powf(0.25) * self.grid.l2_norm(&self.rows[k]))
            .collect()
    }

    /// Copy with every row after `k` set to zero.
    pub fn zeroed_after(&self, k: usize) -> Self {
        let mut out = self.clone();
        for r in out.rows.iter_mut().skip(k + 1) {
            r.iter_mut().for_each(|v| *v = 0.0);
        }
        out
    }

    /// Join `next` onto `self`; the first row of `next` must be the last row
    /// of `self`, and appears once in the result.
    pub fn concatenate(&self, next: &MarginalHistory) -> Result<Self> {
        if self.grid != next.grid {
            return usage("cannot join histories on different grids");
        }
        if (self.mesh.dt() - next.mesh.dt()).abs() > 1e-12 * self.mesh.dt() {
            return usage("cannot join histories with different time steps");
        }
        if self.last() != next.rows[0].as_slice() {
            return usage("histories do not share their joint row");
        }
        let steps = self.rows.len() - 1 + next.rows.len() - 1;
        let horizon =
            self.time(self.rows.len() - 1) + next.mesh.node(next.rows.len() - 1) - self.start;
        let mut out = self.clone();
        out.mesh = TimeMesh::new(horizon, steps)?;
        out.rows.extend(next.rows.iter().skip(1).cloned());
        out.mass_log.extend(next.mass_log.iter().skip(1));
        out.clip_log.extend(next.clip_log.iter().skip(1));
        Ok(out)
    }
}

/// Row-wise distances between two histories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTable {
    pub times: Vec<f64>,
    pub l1: Vec<f64>,
    pub l2: Vec<f64>,
    pub linf: Vec<f64>,
    pub max_l1: f64,
    pub max_l2: f64,
    pub max_linf: f64,
}

/// Per-row `L^1`, `L^2` and `L^inf` distances and their maxima.
pub fn compare_histories(a: &MarginalHistory, b: &MarginalHistory) -> Result<ErrorTable> {
    if a.grid != b.grid {
        return usage("histories live on different grids");
    }
    if a.mesh != b.mesh || a.rows.len() != b.rows.len() {
        return usage(format!(
            "histories have different meshes or lengths ({} vs {} rows)",
            a.rows.len(),
            b.rows.len()
        ));
    }
    let grid = &a.grid;
    let mut table = ErrorTable {
        times: Vec::new(),
        l1: Vec::new(),
        l2: Vec::new(),
        linf: Vec::new(),
        max_l1: 0.0,
        max_l2: 0.0,
        max_linf: 0.0,
    };
    for (k, (ra, rb)) in a.rows.iter().zip(&b.rows).enumerate() {
        let diff: Vec<f64> = ra.iter().zip(rb).map(|(x, y)| x - y).collect();
        let (l1, l2) = (grid.l1_norm(&diff), grid.l2_norm(&diff));
        let linf = diff.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        table.times.push(a.time(k));
        table.l1.push(l1);
        table.l2.push(l2);
        table.linf.push(linf);
        table.max_l1 = table.max_l1.max(l1);
        table.max_l2 = table.max_l2.max(l2);
        table.max_linf = table.max_linf.max(linf);
    }
    Ok(table)
}
