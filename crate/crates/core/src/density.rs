//! Reference densities: closed family of test densities with normalization,
//! rejection sampling, and fine-grid oracles for true diagrams and modes.
//!
//! The analytic families are the two-bump 1D cosine density, the 2D
//! four-bump lens density, the 2D double-diamond cone density, and the
//! hard-instance families used for lower-bound constructions (a Hölder base
//! slope with a sliding bump, and the two-point unimodal pair with corner
//! sinks). A piecewise-constant density over any [`CellField`] closes the
//! family under histogram estimates.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::grid::{CellField, GridSpec, SampleSet};
use crate::math;
use crate::metrics::ModeSet;
use crate::persistence::{superlevel_diagram, PersistenceDiagram};
use crate::rng::{derive_seed, stream, uniform01};
use crate::Result;

/// Hard cap on oracle / quadrature grid sizes.
pub const MAX_FINE_CELLS: usize = 1 << 22;

const SAMPLE_MAX_TRIES: usize = 100_000;

/// The supported density family and its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityFamily {
    /// 1D: `max(cos(2πx) + 2·1[x ≥ 1/2], 0)`, two boundary modes.
    Example1,
    /// 2D: four quadratic bumps on a lens-shaped support.
    Example21,
    /// 2D: two cone pairs, each pinched at a single point.
    Example22,
    /// 1D Hölder slope with a sliding bump at `m_index / floor(1/h)`.
    LowerBound1d { h: f64, m_index: usize, lip: f64, alpha: f64 },
    /// Unimodal base: `shift + 1 - ‖x - ½·1‖_∞^α`.
    TwoPointF0 { dim: usize, alpha: f64 },
    /// Base plus a bump at `(½+h)·1` minus matching corner sinks.
    TwoPointF1 { dim: usize, alpha: f64, lip: f64, h: f64 },
    /// Piecewise-constant density over a cell field.
    Grid(CellField),
}

/// `‖f_0‖_1` of the two-point base bump, in closed form.
pub fn two_point_base_l1(dim: usize, alpha: f64) -> f64 {
    1.0 - dim as f64 / (math::powf(2.0, alpha) * (alpha + dim as f64))
}

/// The additive shift `1 - ‖f_0‖_1` making the two-point base a density.
pub fn two_point_shift(dim: usize, alpha: f64) -> f64 {
    1.0 - two_point_base_l1(dim, alpha)
}

fn linf_dist(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// A normalized reference density with cached normalization constant and
/// envelope bound. Immutable after construction; safe to share.
#[derive(Debug, Clone)]
pub struct DensitySpec {
    family: DensityFamily,
    dim: usize,
    z: f64,
    sup_unnormalized: f64,
    quad_cells: usize,
}

impl DensitySpec {
    /// Validates the family parameters, caches the normalization constant
    /// (Richardson-extrapolated midpoint quadrature on the default fine grid)
    /// and the envelope bound.
    pub fn new(family: DensityFamily) -> Result<Self> {
        let dim = match &family {
            DensityFamily::Example1 => 1,
            DensityFamily::Example21 | DensityFamily::Example22 => 2,
            DensityFamily::LowerBound1d { h, m_index, lip, alpha } => {
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return Err(Error::InvalidParameter("alpha must lie in (0, 1]"));
                }
                if !(*lip > 0.0 && lip.is_finite()) {
                    return Err(Error::InvalidParameter("lip must be positive"));
                }
                if !(*h > 0.0 && *h <= 0.5) {
                    return Err(Error::InvalidParameter("h must lie in (0, 0.5]"));
                }
                let floor_inv = math::floor(1.0 / h);
                let m = *m_index as f64;
                if !(m > floor_inv / 4.0 && m < 3.0 * floor_inv / 4.0) {
                    return Err(Error::InvalidParameter(
                        "m_index must satisfy floor(1/h)/4 < m < 3 floor(1/h)/4",
                    ));
                }
                1
            }
            DensityFamily::TwoPointF0 { dim, alpha } => {
                if *dim == 0 {
                    return Err(Error::InvalidParameter("dimension must be at least 1"));
                }
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return Err(Error::InvalidParameter("alpha must lie in (0, 1]"));
                }
                *dim
            }
            DensityFamily::TwoPointF1 { dim, alpha, lip, h } => {
                if *dim == 0 {
                    return Err(Error::InvalidParameter("dimension must be at least 1"));
                }
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return Err(Error::InvalidParameter("alpha must lie in (0, 1]"));
                }
                if !(*lip > 0.0 && lip.is_finite()) {
                    return Err(Error::InvalidParameter("lip must be positive"));
                }
                // bump support [1/2, 1/2+2h] must stay clear of the corner sinks
                if !(*h > 0.0 && *h < 1.0 / 6.0) {
                    return Err(Error::InvalidParameter("h must lie in (0, 1/6)"));
                }
                let corner_value =
                    two_point_shift(*dim, *alpha) + 1.0 - math::powf(0.5, *alpha);
                if lip * math::powf(*h, *alpha) > corner_value {
                    return Err(Error::InvalidParameter(
                        "corner sinks would make the density negative",
                    ));
                }
                *dim
            }
            DensityFamily::Grid(field) => field.grid().dim(),
        };

        let quad_cells = default_quad_cells(dim);
        let mut spec =
            DensitySpec { family, dim, z: 0.0, sup_unnormalized: 0.0, quad_cells };
        let (z, sup) = match &spec.family {
            // exact for piecewise-constant fields
            DensityFamily::Grid(field) => {
                (field.mass(), field.values().iter().copied().fold(0.0, f64::max))
            }
            _ => {
                // Richardson-extrapolated midpoint rule: support boundaries
                // make the plain midpoint mass converge only at O(1/q), and
                // the boundary term cancels between the two resolutions.
                let (full, sup) = spec.quadrature_stats(quad_cells);
                let (half, _) = spec.quadrature_stats(quad_cells / 2);
                (2.0 * full - half, sup)
            }
        };
        if !(z.is_finite() && z > 0.0 && sup.is_finite() && sup > 0.0) {
            return Err(Error::DegenerateDensity);
        }
        spec.z = z;
        spec.sup_unnormalized = sup;
        Ok(spec)
    }

    pub fn example1() -> Result<Self> {
        DensitySpec::new(DensityFamily::Example1)
    }

    pub fn example2_1() -> Result<Self> {
        DensitySpec::new(DensityFamily::Example21)
    }

    pub fn example2_2() -> Result<Self> {
        DensitySpec::new(DensityFamily::Example22)
    }

    /// Uniform density on the cube, as a constant grid field.
    pub fn uniform(dim: usize) -> Result<Self> {
        let grid = GridSpec::new(dim, 2)?;
        let field = CellField::from_values(grid, vec![1.0; grid.total_cells()])?;
        DensitySpec::new(DensityFamily::Grid(field))
    }

    pub fn grid(field: CellField) -> Result<Self> {
        DensitySpec::new(DensityFamily::Grid(field))
    }

    pub fn lower_bound_1d(h: f64, m_index: usize, lip: f64, alpha: f64) -> Result<Self> {
        DensitySpec::new(DensityFamily::LowerBound1d { h, m_index, lip, alpha })
    }

    pub fn two_point_f0(dim: usize, alpha: f64) -> Result<Self> {
        DensitySpec::new(DensityFamily::TwoPointF0 { dim, alpha })
    }

    pub fn two_point_f1(dim: usize, alpha: f64, lip: f64, h: f64) -> Result<Self> {
        DensitySpec::new(DensityFamily::TwoPointF1 { dim, alpha, lip, h })
    }

    pub fn family(&self) -> &DensityFamily {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cached normalization constant `Z = ∫ max(f, 0)`.
    pub fn z(&self) -> f64 {
        self.z
    }

    /// Per-axis resolution of the quadrature grid behind the cached `Z`.
    pub fn quadrature_cells_per_axis(&self) -> usize {
        self.quad_cells
    }

    /// Unnormalized density, clipped at zero where the formula dips below.
    pub fn eval_unnormalized(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::OutOfDomain);
        }
        Ok(self.eval_raw(x))
    }

    /// Normalized density `f(x)/Z`.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval_unnormalized(x)? / self.z)
    }

    fn eval_raw(&self, x: &[f64]) -> f64 {
        match &self.family {
            DensityFamily::Example1 => {
                let t = x[0];
                let jump = if t >= 0.5 { 2.0 } else { 0.0 };
                (math::cos(2.0 * core::f64::consts::PI * t) + jump).max(0.0)
            }
            DensityFamily::Example21 => {
                let (u, v) = (x[0], x[1]);
                if !(0.25..=0.75).contains(&v) {
                    return 0.0;
                }
                let q = (v - 0.25) * (v - 0.75); // <= 0 inside the strip
                if u < 0.25 - q || u > 0.75 + q {
                    return 0.0;
                }
                let sq = |cx: f64, cy: f64| (u - cx) * (u - cx) + (v - cy) * (v - cy);
                let f = 2.0 * (0.05 - sq(0.25, 0.25)).max(0.0)
                    + 4.0 * (0.05 - sq(0.75, 0.75)).max(0.0)
                    + (0.0625 - sq(0.75, 0.25)).max(0.0)
                    + (0.0625 - sq(0.25, 0.75)).max(0.0);
                f.max(0.0)
            }
            DensityFamily::Example22 => {
                let (u, v) = (x[0], x[1]);
                let left = (u - 0.25).abs() + (v - 0.25).abs() <= 0.25
                    || (u - 0.25).abs() + (v - 0.75).abs() <= 0.25;
                if left {
                    let r = math::sqrt((u - 0.25) * (u - 0.25) + (v - 0.5) * (v - 0.5));
                    return 0.5 * (0.125 - r).max(0.0);
                }
                let right = (u - 0.75).abs() + (v - 0.75).abs() <= 0.25
                    || (u - 0.75).abs() + (v - 0.25).abs() <= 0.25;
                if right {
                    let r = math::sqrt((u - 0.75) * (u - 0.75) + (v - 0.5) * (v - 0.5));
                    return (0.125 - r).max(0.0);
                }
                0.0
            }
            DensityFamily::LowerBound1d { h, m_index, lip, alpha } => {
                let t = x[0];
                let x_m = *m_index as f64 / math::floor(1.0 / h);
                let base = 0.5 * lip * math::powf(t, *alpha);
                let bump =
                    lip * (math::powf(*h, *alpha) - math::powf((t - x_m).abs(), *alpha)).max(0.0);
                (1.0 + base + bump).max(0.0)
            }
            DensityFamily::TwoPointF0 { dim, alpha } => {
                let c = vec![0.5; *dim];
                let shift = two_point_shift(*dim, *alpha);
                (shift + 1.0 - math::powf(linf_dist(x, &c), *alpha)).max(0.0)
            }
            DensityFamily::TwoPointF1 { dim, alpha, lip, h } => {
                let c = vec![0.5; *dim];
                let shift = two_point_shift(*dim, *alpha);
                let mut f = shift + 1.0 - math::powf(linf_dist(x, &c), *alpha);
                let x1 = vec![0.5 + h; *dim];
                let ha = math::powf(*h, *alpha);
                f += lip * (ha - math::powf(linf_dist(x, &x1), *alpha)).max(0.0);
                // one sink at each cube vertex
                let mut corner = vec![0.0f64; *dim];
                loop {
                    f -= lip * (ha - math::powf(linf_dist(x, &corner), *alpha)).max(0.0);
                    let mut axis = *dim;
                    loop {
                        if axis == 0 {
                            return f.max(0.0);
                        }
                        axis -= 1;
                        if corner[axis] == 0.0 {
                            corner[axis] = 1.0;
                            break;
                        }
                        corner[axis] = 0.0;
                    }
                }
            }
            DensityFamily::Grid(field) => match field.grid().cell_of_point_flat(x) {
                Some(flat) => field.values()[flat],
                None => 0.0,
            },
        }
    }

    fn quadrature_stats(&self, cells_per_axis: usize) -> (f64, f64) {
        let q = cells_per_axis;
        let qf = q as f64;
        let mut total = 0.0f64;
        let mut sup = 0.0f64;
        let mut x = vec![0.0f64; self.dim];
        let mut idx = vec![0usize; self.dim];
        loop {
            for a in 0..self.dim {
                x[a] = (idx[a] as f64 + 0.5) / qf;
            }
            let v = self.eval_raw(&x);
            total += v;
            if v > sup {
                sup = v;
            }
            let mut axis = self.dim;
            loop {
                if axis == 0 {
                    let vol = math::powf(1.0 / qf, self.dim as f64);
                    return (total * vol, sup);
                }
                axis -= 1;
                if idx[axis] + 1 < q {
                    idx[axis] += 1;
                    break;
                }
                idx[axis] = 0;
            }
        }
    }

    /// Midpoint-rule mass at an explicit resolution, for convergence checks.
    pub fn quadrature_z(&self, cells_per_axis: usize) -> Result<f64> {
        check_fine_grid(self.dim, cells_per_axis)?;
        Ok(self.quadrature_stats(cells_per_axis).0)
    }

    /// Rejection sampling from the uniform envelope.
    ///
    /// The envelope bound is `1.05 ×` the fine-grid maximum of the density;
    /// point `i` draws from its own stream derived from `(seed, i)`, so the
    /// output is reproducible and order-independent.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleSet> {
        if n == 0 {
            return Err(Error::EmptySamples);
        }
        let bound = 1.05 * self.sup_unnormalized;
        if !(bound > 0.0) {
            return Err(Error::DegenerateDensity);
        }
        let mut coords = Vec::with_capacity(n * self.dim);
        let mut x = vec![0.0f64; self.dim];
        for i in 0..n {
            let mut rng = stream(derive_seed(seed, i as u64, 0x5A));
            let mut tries = 0usize;
            loop {
                for slot in x.iter_mut() {
                    *slot = uniform01(&mut rng);
                }
                let u = uniform01(&mut rng);
                if u * bound <= self.eval_raw(&x) {
                    coords.extend_from_slice(&x);
                    break;
                }
                tries += 1;
                if tries >= SAMPLE_MAX_TRIES {
                    return Err(Error::DegenerateDensity);
                }
            }
        }
        SampleSet::new(self.dim, coords)
    }

    /// Ground-truth diagram at resolution `fine_m`: the normalized density is
    /// evaluated at cell centers and the superlevel diagram computed with no
    /// dilation. Points whose lifetime moves by more than
    /// `2 · lip_estimate / fine_m` against the half-resolution diagram are
    /// flagged unstable.
    pub fn oracle_diagram(&self, fine_m: usize) -> Result<OracleDiagram> {
        check_fine_grid(self.dim, fine_m)?;
        let fine = self.field_at(fine_m)?;
        let diagram = superlevel_diagram(&fine);
        let lip_estimate = max_gradient(&fine);

        let mut unstable = vec![false; diagram.points().len()];
        if fine_m >= 4 {
            let coarse = superlevel_diagram(&self.field_at(fine_m / 2)?);
            let tol = 2.0 * lip_estimate / fine_m as f64;
            for (i, p) in diagram.points().iter().enumerate() {
                let drift = coarse
                    .points()
                    .iter()
                    .filter(|q| q.essential == p.essential)
                    .map(|q| (q.birth - p.birth).abs().max((q.death - p.death).abs()))
                    .fold(f64::INFINITY, f64::min);
                unstable[i] = !(drift <= tol);
            }
        }
        Ok(OracleDiagram { diagram, unstable, lip_estimate })
    }

    fn field_at(&self, m: usize) -> Result<CellField> {
        let grid = GridSpec::new(self.dim, m)?;
        let mf = m as f64;
        let mut values = vec![0.0f64; grid.total_cells()];
        let mut x = vec![0.0f64; self.dim];
        let mut idx = vec![0usize; self.dim];
        let mut flat = 0usize;
        loop {
            for a in 0..self.dim {
                x[a] = (idx[a] as f64 + 0.5) / mf;
            }
            values[flat] = self.eval_raw(&x) / self.z;
            flat += 1;
            let mut axis = self.dim;
            loop {
                if axis == 0 {
                    return CellField::from_values(grid, values);
                }
                axis -= 1;
                if idx[axis] + 1 < m {
                    idx[axis] += 1;
                    break;
                }
                idx[axis] = 0;
            }
        }
    }

    /// True mode locations and normalized local-maximum values.
    ///
    /// Families whose formulas force the maxima report them analytically;
    /// the 1D cosine density and grid densities read them off a fine-grid
    /// oracle diagram. Modes are sorted by decreasing value.
    pub fn oracle_modes(&self) -> Result<(ModeSet, Vec<f64>)> {
        let mut entries: Vec<(Vec<f64>, f64)> = match &self.family {
            DensityFamily::Example1 => {
                let oracle = self.oracle_diagram(8192)?;
                let grid = oracle.diagram.grid().expect("oracle carries a grid");
                let mut pts: Vec<_> = oracle.diagram.points().to_vec();
                pts.sort_by(|a, b| {
                    b.essential
                        .cmp(&a.essential)
                        .then((b.birth - b.death).total_cmp(&(a.birth - a.death)))
                });
                pts.truncate(2);
                pts.iter().map(|p| (grid.cell_center(p.birth_cell), p.birth)).collect()
            }
            DensityFamily::Example21 => [
                (0.75, 0.75),
                (0.25, 0.25),
                (0.75, 0.25),
                (0.25, 0.75),
            ]
            .iter()
            .map(|&(a, b)| {
                let loc = vec![a, b];
                let val = self.eval_raw(&loc) / self.z;
                (loc, val)
            })
            .collect(),
            DensityFamily::Example22 => [(0.75, 0.5), (0.25, 0.5)]
                .iter()
                .map(|&(a, b)| {
                    let loc = vec![a, b];
                    let val = self.eval_raw(&loc) / self.z;
                    (loc, val)
                })
                .collect(),
            DensityFamily::LowerBound1d { h, m_index, .. } => {
                let x_m = *m_index as f64 / math::floor(1.0 / h);
                [1.0, x_m]
                    .iter()
                    .map(|&t| {
                        let loc = vec![t];
                        let val = self.eval_raw(&loc) / self.z;
                        (loc, val)
                    })
                    .collect()
            }
            DensityFamily::TwoPointF0 { dim, .. } => {
                let loc = vec![0.5; *dim];
                let val = self.eval_raw(&loc) / self.z;
                vec![(loc, val)]
            }
            DensityFamily::TwoPointF1 { dim, h, .. } => {
                let loc = vec![0.5 + h; *dim];
                let val = self.eval_raw(&loc) / self.z;
                vec![(loc, val)]
            }
            DensityFamily::Grid(field) => {
                let normalized = self.field_at(field.grid().cells_per_axis())?;
                let d = superlevel_diagram(&normalized);
                let grid = field.grid();
                d.points()
                    .iter()
                    .map(|p| (grid.cell_center(p.birth_cell), p.birth))
                    .collect()
            }
        };
        entries.sort_by(|a, b| b.1.total_cmp(&a.1));
        let values: Vec<f64> = entries.iter().map(|e| e.1).collect();
        let locations: Vec<Vec<f64>> = entries.into_iter().map(|e| e.0).collect();
        Ok((ModeSet::from_points(self.dim, &locations)?, values))
    }
}

/// Oracle diagram with per-point resolution-stability flags.
#[derive(Debug, Clone)]
pub struct OracleDiagram {
    pub diagram: PersistenceDiagram,
    /// Per-point flag: lifetime moved more than the Lipschitz tolerance when
    /// halving the resolution.
    pub unstable: Vec<bool>,
    /// Max axis-adjacent difference quotient of the normalized fine field.
    pub lip_estimate: f64,
}

fn check_fine_grid(dim: usize, m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidGrid("need at least 2 cells per axis"));
    }
    let mut total: u128 = 1;
    for _ in 0..dim {
        total = total.saturating_mul(m as u128);
        if total > MAX_FINE_CELLS as u128 {
            return Err(Error::GridTooLarge { cells: total, max: MAX_FINE_CELLS as u128 });
        }
    }
    Ok(())
}

fn default_quad_cells(dim: usize) -> usize {
    let cap = math::powf(MAX_FINE_CELLS as f64, 1.0 / dim as f64);
    (cap as usize).min(2048).max(2)
}

/// Max |Δ value| / h over axis-adjacent cell pairs.
fn max_gradient(field: &CellField) -> f64 {
    let grid = field.grid();
    let m = grid.cells_per_axis();
    let values = field.values();
    let dim = grid.dim();
    let mut best = 0.0f64;
    let mut stride = grid.total_cells() / m;
    for _axis in 0..dim {
        let block = stride * m;
        for base in 0..values.len() / block {
            let offset = base * block;
            for lane in 0..stride {
                let start = offset + lane;
                for i in 0..m - 1 {
                    let d = (values[start + (i + 1) * stride] - values[start + i * stride]).abs();
                    if d > best {
                        best = d;
                    }
                }
            }
        }
        stride /= m;
    }
    best * m as f64
}

/// Named preset: a reference density bundled with the estimator settings used
/// for it (Hölder exponent, reach parameter, calibration constant, sample
/// size, oracle resolution).
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub spec: DensitySpec,
    pub alpha: f64,
    pub mu: f64,
    pub h_const: f64,
    pub default_n: usize,
    pub oracle_fine_m: usize,
}

/// Preset names accepted by [`preset`].
pub const PRESET_NAMES: &[&str] = &[
    "example1",
    "example2_1",
    "example2_2",
    "uniform_1d",
    "uniform_2d",
    "two_point_f0",
    "two_point_f1",
    "lower_bound_1d",
];

/// Looks up a reference density and its estimator settings by name.
pub fn preset(name: &str) -> Result<Preset> {
    let p = match name {
        "example1" => Preset {
            name: "example1",
            spec: DensitySpec::example1()?,
            alpha: 0.5,
            mu: 1.0,
            h_const: 0.25,
            default_n: 1000,
            oracle_fine_m: 4096,
        },
        "example2_1" => Preset {
            name: "example2_1",
            spec: DensitySpec::example2_1()?,
            alpha: 0.5,
            mu: 0.5,
            h_const: 1.0 / 6.0,
            default_n: 10_000,
            oracle_fine_m: 512,
        },
        "example2_2" => Preset {
            name: "example2_2",
            spec: DensitySpec::example2_2()?,
            alpha: 0.5,
            mu: 0.5,
            h_const: 0.25,
            default_n: 30_000,
            oracle_fine_m: 512,
        },
        "uniform_1d" => Preset {
            name: "uniform_1d",
            spec: DensitySpec::uniform(1)?,
            alpha: 0.5,
            mu: 1.0,
            h_const: 0.25,
            default_n: 10_000,
            oracle_fine_m: 4096,
        },
        "uniform_2d" => Preset {
            name: "uniform_2d",
            spec: DensitySpec::uniform(2)?,
            alpha: 0.5,
            mu: 1.0,
            h_const: 0.25,
            default_n: 10_000,
            oracle_fine_m: 512,
        },
        "two_point_f0" => Preset {
            name: "two_point_f0",
            spec: DensitySpec::two_point_f0(2, 1.0)?,
            alpha: 1.0,
            mu: 1.0,
            h_const: 0.25,
            default_n: 10_000,
            oracle_fine_m: 512,
        },
        "two_point_f1" => Preset {
            name: "two_point_f1",
            spec: DensitySpec::two_point_f1(2, 1.0, 2.0, 0.1)?,
            alpha: 1.0,
            mu: 1.0,
            h_const: 0.25,
            default_n: 10_000,
            oracle_fine_m: 512,
        },
        "lower_bound_1d" => Preset {
            name: "lower_bound_1d",
            spec: DensitySpec::lower_bound_1d(0.1, 5, 1.0, 1.0)?,
            alpha: 1.0,
            mu: 1.0,
            h_const: 0.25,
            default_n: 10_000,
            oracle_fine_m: 4096,
        },
        _ => return Err(Error::InvalidParameter("unknown density preset")),
    };
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example22_spot_values() {
        let d = DensitySpec::example2_2().unwrap();
        assert!((d.eval_unnormalized(&[0.75, 0.5]).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(d.eval_unnormalized(&[0.5, 0.5]).unwrap(), 0.0);
        let peak_left = d.eval_unnormalized(&[0.25, 0.5]).unwrap();
        assert!((peak_left - 0.0625).abs() < 1e-15);
        assert!(d.eval_unnormalized(&[1.5, 0.5]).is_err());
    }

    #[test]
    fn example21_spot_values() {
        let d = DensitySpec::example2_1().unwrap();
        assert!((d.eval_unnormalized(&[0.75, 0.75]).unwrap() - 0.2).abs() < 1e-15);
        assert!((d.eval_unnormalized(&[0.25, 0.25]).unwrap() - 0.1).abs() < 1e-15);
        // lens pinches: (0.5, 0.5) is outside the support
        assert_eq!(d.eval_unnormalized(&[0.35, 0.5]).unwrap(), 0.0);
        // outside the strip entirely
        assert_eq!(d.eval_unnormalized(&[0.5, 0.1]).unwrap(), 0.0);
    }

    #[test]
    fn grid_density_unit_mass() {
        let d = DensitySpec::uniform(2).unwrap();
        assert_eq!(d.z(), 1.0);
        assert_eq!(d.density(&[0.3, 0.7]).unwrap(), 1.0);
    }

    #[test]
    fn example1_quadrature_stability() {
        let d = DensitySpec::example1().unwrap();
        let z14 = d.quadrature_z(1 << 14).unwrap();
        let z15 = d.quadrature_z(1 << 15).unwrap();
        assert!((z14 - z15).abs() / z15 <= 1e-4, "z14 {z14} z15 {z15}");
        // Z = 1 + 1/(2π)
        let expected = 1.0 + 1.0 / (2.0 * core::f64::consts::PI);
        assert!((d.z() - expected).abs() < 1e-3);
    }

    #[test]
    fn two_point_base_closed_form() {
        // ∫ (1 - |x - 1/2|) = 3/4 in 1D at α = 1
        assert!((two_point_base_l1(1, 1.0) - 0.75).abs() < 1e-15);
        let d = DensitySpec::two_point_f0(1, 1.0).unwrap();
        let shift = two_point_shift(1, 1.0);
        let base_mass = d.quadrature_z(1 << 14).unwrap() - shift;
        assert!((base_mass - 0.75).abs() < 1e-6);
        // the full density integrates to one by construction
        assert!((d.z() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn two_point_f1_unit_mass_and_validation() {
        let d = DensitySpec::two_point_f1(2, 1.0, 2.0, 0.1).unwrap();
        assert!((d.z() - 1.0).abs() < 1e-4);
        // sinks deep enough to make the density negative are rejected
        assert!(DensitySpec::two_point_f1(2, 1.0, 50.0, 0.1).is_err());
        assert!(DensitySpec::two_point_f1(2, 1.0, 2.0, 0.3).is_err());
    }

    #[test]
    fn lower_bound_family_shape() {
        // two local maxima: the right edge at 1 + L/2, the bump at x_m
        let d = DensitySpec::lower_bound_1d(0.1, 5, 1.0, 1.0).unwrap();
        let at_one = d.eval_unnormalized(&[1.0]).unwrap();
        assert!((at_one - 1.5).abs() < 1e-12);
        let at_bump = d.eval_unnormalized(&[0.5]).unwrap();
        assert!((at_bump - 1.35).abs() < 1e-12); // 1 + 0.25 + 0.1
        // bump is a strict local max
        assert!(at_bump > d.eval_unnormalized(&[0.45]).unwrap());
        assert!(at_bump > d.eval_unnormalized(&[0.55]).unwrap());
        // parameter range enforced
        assert!(DensitySpec::lower_bound_1d(0.1, 2, 1.0, 1.0).is_err());
        assert!(DensitySpec::lower_bound_1d(0.1, 8, 1.0, 1.0).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_in_support() {
        let d = DensitySpec::example2_2().unwrap();
        let a = d.sample(64, 9).unwrap();
        let b = d.sample(64, 9).unwrap();
        assert_eq!(a, b);
        let c = d.sample(64, 10).unwrap();
        assert_ne!(a, c);
        for p in a.iter() {
            assert!(d.eval_unnormalized(p).unwrap() > 0.0);
        }
        let single = d.sample(1, 3).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn oracle_diagram_of_grid_density_is_its_own_diagram() {
        let g = GridSpec::new(2, 4).unwrap();
        let values: Vec<f64> = (0..16).map(|i| ((i * 7) % 5) as f64 + 1.0).collect();
        let field = CellField::from_values(g, values).unwrap();
        let d = DensitySpec::grid(field.clone()).unwrap();
        let oracle = d.oracle_diagram(4).unwrap();
        let z = d.z();
        let direct_values: Vec<f64> = field.values().iter().map(|v| v / z).collect();
        let direct =
            superlevel_diagram(&CellField::from_values(g, direct_values).unwrap());
        assert!(oracle.diagram.same_multiset(&direct));
    }

    #[test]
    fn oracle_diagram_example22_two_classes() {
        let d = DensitySpec::example2_2().unwrap();
        let oracle = d.oracle_diagram(256).unwrap();
        let z = d.z();
        // grid-scale tolerance for the cone peaks
        let tol = 4.0 / 256.0 / z * 1.5;
        let mut persistent: Vec<_> = oracle
            .diagram
            .points()
            .iter()
            .filter(|p| p.essential || p.lifetime() > 0.02 / z)
            .collect();
        persistent.sort_by(|a, b| b.birth.total_cmp(&a.birth));
        assert_eq!(persistent.len(), 2, "{persistent:?}");
        assert!((persistent[0].birth - 0.125 / z).abs() < tol);
        assert!((persistent[1].birth - 0.0625 / z).abs() < tol);
    }

    #[test]
    fn oracle_diagram_example21_four_classes() {
        let d = DensitySpec::example2_1().unwrap();
        let oracle = d.oracle_diagram(256).unwrap();
        let z = d.z();
        let persistent: Vec<_> = oracle
            .diagram
            .points()
            .iter()
            .filter(|p| p.essential || p.lifetime() > 0.01 / z)
            .collect();
        assert_eq!(persistent.len(), 4, "{persistent:?}");
    }

    #[test]
    fn oracle_modes_locations() {
        let d = DensitySpec::example2_2().unwrap();
        let (modes, values) = d.oracle_modes().unwrap();
        assert_eq!(modes.len(), 2);
        assert_eq!(modes.point(0), &[0.75, 0.5]);
        assert_eq!(modes.point(1), &[0.25, 0.5]);
        assert!(values[0] > values[1]);

        let d = DensitySpec::two_point_f1(2, 1.0, 2.0, 0.1).unwrap();
        let (modes, _) = d.oracle_modes().unwrap();
        assert_eq!(modes.point(0), &[0.6, 0.6]);
    }

    #[test]
    fn oracle_modes_example1_near_edges() {
        let d = DensitySpec::example1().unwrap();
        let (modes, values) = d.oracle_modes().unwrap();
        assert_eq!(modes.len(), 2);
        assert!(modes.point(0)[0] > 0.999); // dominant mode at the right edge
        assert!(modes.point(1)[0] < 0.001);
        // pre-normalization peak ratio 3:1
        let ratio = values[0] / values[1];
        assert!((ratio - 3.0).abs() < 0.01, "ratio {ratio}");
    }

    #[test]
    fn two_point_f1_fine_argmax_confirms_analytic_mode() {
        let d = DensitySpec::two_point_f1(2, 1.0, 2.0, 0.1).unwrap();
        let oracle = d.oracle_diagram(200).unwrap();
        let ess: Vec<_> = oracle.diagram.points().iter().filter(|p| p.essential).collect();
        assert_eq!(ess.len(), 1);
        let grid = oracle.diagram.grid().unwrap();
        let center = grid.cell_center(ess[0].birth_cell);
        assert!((center[0] - 0.6).abs() <= 0.01);
        assert!((center[1] - 0.6).abs() <= 0.01);
    }

    #[test]
    fn two_point_f0_unimodal_center() {
        let d = DensitySpec::two_point_f0(2, 1.0).unwrap();
        let oracle = d.oracle_diagram(128).unwrap();
        assert_eq!(oracle.diagram.points().len(), 1);
        let grid = oracle.diagram.grid().unwrap();
        let center = grid.cell_center(oracle.diagram.points()[0].birth_cell);
        assert!((center[0] - 0.5).abs() <= 0.005);
    }

    #[test]
    fn presets_resolve() {
        for name in PRESET_NAMES {
            let p = preset(name).unwrap();
            assert_eq!(p.name, *name);
        }
        assert!(preset("nope").is_err());
    }
}
