//! Regular grids over `[0,1]^d`, histogram fields and Chebyshev max-dilation.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::math;
use crate::Result;

/// The regular orthogonal grid over `[0,1]^d` with `m` cells per axis.
///
/// The step is `h = 1/m`; all geometry is expressed through the integer `m`
/// (cell boundaries `i/m`, centers `(i+0.5)/m`) so no rounding accumulates.
/// Multi-indices map to flat indices in row-major order (last axis fastest).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    dim: usize,
    cells_per_axis: usize,
    total_cells: usize,
}

impl GridSpec {
    /// Builds a grid; rejects `dim = 0` and `cells_per_axis < 2`.
    pub fn new(dim: usize, cells_per_axis: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidGrid("dimension must be at least 1"));
        }
        if cells_per_axis < 2 {
            return Err(Error::InvalidGrid("need at least 2 cells per axis"));
        }
        let mut total: usize = 1;
        for _ in 0..dim {
            total = total
                .checked_mul(cells_per_axis)
                .ok_or(Error::InvalidGrid("cell count overflows usize"))?;
        }
        Ok(GridSpec { dim, cells_per_axis, total_cells: total })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    /// Grid step `h = 1/m`.
    pub fn h(&self) -> f64 {
        1.0 / self.cells_per_axis as f64
    }

    pub fn total_cells(&self) -> usize {
        self.total_cells
    }

    /// Flat index of a multi-index (row-major, last axis fastest).
    pub fn flat_index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.dim);
        let mut flat = 0usize;
        for &c in multi {
            debug_assert!(c < self.cells_per_axis);
            flat = flat * self.cells_per_axis + c;
        }
        flat
    }

    /// Writes the multi-index of `flat` into `out`.
    pub fn multi_index_into(&self, flat: usize, out: &mut [usize]) {
        debug_assert!(flat < self.total_cells);
        debug_assert_eq!(out.len(), self.dim);
        let mut rest = flat;
        for axis in (0..self.dim).rev() {
            out[axis] = rest % self.cells_per_axis;
            rest /= self.cells_per_axis;
        }
    }

    /// Multi-index of `flat` as a fresh vector.
    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let mut out = vec![0usize; self.dim];
        self.multi_index_into(flat, &mut out);
        out
    }

    /// Cell containing `point`, or `None` for points outside `[0,1]^d`.
    ///
    /// Cells are half-open with the upper face folded into the last cell:
    /// `c_i = min(floor(x_i * m), m - 1)`.
    ///
    /// Panics if `point.len() != dim`.
    pub fn cell_of_point(&self, point: &[f64]) -> Option<Vec<usize>> {
        assert_eq!(point.len(), self.dim, "point dimension mismatch");
        let m = self.cells_per_axis as f64;
        let mut multi = vec![0usize; self.dim];
        for (axis, &x) in point.iter().enumerate() {
            if !(0.0..=1.0).contains(&x) {
                return None;
            }
            let c = math::floor(x * m) as usize;
            multi[axis] = c.min(self.cells_per_axis - 1);
        }
        Some(multi)
    }

    /// Flat-index variant of [`cell_of_point`](Self::cell_of_point).
    pub fn cell_of_point_flat(&self, point: &[f64]) -> Option<usize> {
        self.cell_of_point(point).map(|m| self.flat_index(&m))
    }

    /// Center of the cell with flat index `flat`.
    pub fn cell_center(&self, flat: usize) -> Vec<f64> {
        let multi = self.multi_index(flat);
        let m = self.cells_per_axis as f64;
        multi.iter().map(|&c| (c as f64 + 0.5) / m).collect()
    }
}

/// Radius of the index dilation realizing the thickening by `⌈√d/μ⌉·h`.
pub fn dilation_radius(dim: usize, mu: f64) -> Result<usize> {
    if dim == 0 {
        return Err(Error::InvalidGrid("dimension must be at least 1"));
    }
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::InvalidParameter("mu must lie in (0, 1]"));
    }
    Ok(math::ceil(math::sqrt(dim as f64) / mu) as usize)
}

/// A finite set of points in `R^d`, stored flat in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    dim: usize,
    coords: Vec<f64>,
}

impl SampleSet {
    /// Wraps flat coordinates; `coords.len()` must be a multiple of `dim`
    /// and every coordinate finite. Points outside `[0,1]^d` are allowed
    /// (they count toward `n` but land in no histogram cell).
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("sample dimension must be at least 1"));
        }
        if coords.len() % dim != 0 {
            return Err(Error::InvalidParameter(
                "coordinate count is not a multiple of the dimension",
            ));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("sample coordinates must be finite"));
        }
        Ok(SampleSet { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// A real value per grid cell, in density units (probability per unit volume).
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl CellField {
    /// Wraps per-cell values; all must be finite and non-negative.
    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.total_cells() {
            return Err(Error::InvalidParameter("value count does not match the grid"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(
                "cell values must be finite and non-negative",
            ));
        }
        Ok(CellField { grid, values })
    }

    /// Histogram density estimate: `values[c] = #{samples in c} / (n h^d)`.
    ///
    /// Samples outside `[0,1]^d` are counted in `n` but binned nowhere, so the
    /// total mass can drop below one for such inputs.
    pub fn histogram(samples: &SampleSet, grid: GridSpec) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySamples);
        }
        if samples.dim() != grid.dim() {
            return Err(Error::DimensionMismatch { expected: grid.dim(), got: samples.dim() });
        }
        let mut counts = vec![0u64; grid.total_cells()];
        for p in samples.iter() {
            if let Some(flat) = grid.cell_of_point_flat(p) {
                counts[flat] += 1;
            }
        }
        let scale = grid.total_cells() as f64 / samples.len() as f64; // m^d / n = 1/(n h^d)
        let values = counts.iter().map(|&c| c as f64 * scale).collect();
        Ok(CellField { grid, values })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Total mass `Σ values[c] · h^d`.
    pub fn mass(&self) -> f64 {
        let hd = 1.0 / self.grid.total_cells() as f64;
        self.values.iter().sum::<f64>() * hd
    }

    /// Chebyshev max-dilation: `out[c] = max { self[c'] : ‖c'−c‖_∞ ≤ k }`,
    /// restricted to in-grid cells. Realizes the set-thickening by `k·h`
    /// exactly on every superlevel set. Separable, one pass per axis.
    pub fn dilate_max(&self, k: usize) -> CellField {
        if k == 0 {
            return self.clone();
        }
        let grid = self.grid;
        let m = grid.cells_per_axis();
        let dim = grid.dim();
        let mut cur = self.values.clone();
        let mut next = vec![0.0f64; cur.len()];
        // stride of axis `a` is m^(dim-1-a)
        let mut stride = grid.total_cells() / m;
        for _axis in 0..dim {
            let block = stride * m; // span of one full line group along this axis
            for base in 0..cur.len() / block {
                let offset = base * block;
                for lane in 0..stride {
                    let start = offset + lane;
                    for i in 0..m {
                        let lo = i.saturating_sub(k);
                        let hi = (i + k).min(m - 1);
                        let mut best = f64::NEG_INFINITY;
                        for j in lo..=hi {
                            let v = cur[start + j * stride];
                            if v > best {
                                best = v;
                            }
                        }
                        next[start + i * stride] = best;
                    }
                }
            }
            core::mem::swap(&mut cur, &mut next);
            stride /= m;
        }
        CellField { grid, values: cur }
    }
}
