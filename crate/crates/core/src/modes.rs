//! Bandwidth calibration, the known-threshold mode estimator, penalized
//! threshold selection, and extraction of mode locations from birth cells.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::grid::{dilation_radius, CellField, GridSpec, SampleSet};
use crate::math;
use crate::metrics::{bottleneck, keep_at_least, truncate};
use crate::persistence::{superlevel_diagram, PersistenceDiagram, PersistencePoint};
use crate::Result;

/// Parameters of the estimation pipeline.
///
/// `alpha` is the Hölder exponent, `mu` the generalized-reach parameter
/// driving the dilation radius, `h_const` the calibration multiplier on
/// `(log n / n)^{1/(d+2α)}`. An explicit `h_override` bypasses calibration
/// (it is snapped to the nearest reciprocal of an integer); `l_known`
/// switches the known-threshold estimator on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub alpha: f64,
    pub mu: f64,
    pub h_const: f64,
    pub h_override: Option<f64>,
    pub l_known: Option<f64>,
}

impl EstimatorConfig {
    pub fn new(alpha: f64, mu: f64, h_const: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter("alpha must lie in (0, 1]"));
        }
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(Error::InvalidParameter("mu must lie in (0, 1]"));
        }
        if !(h_const > 0.0 && h_const.is_finite()) {
            return Err(Error::InvalidParameter("h_const must be positive"));
        }
        Ok(EstimatorConfig { alpha, mu, h_const, h_override: None, l_known: None })
    }

    pub fn with_h(mut self, h: f64) -> Result<Self> {
        if !(h > 0.0 && h <= 0.5) {
            return Err(Error::InvalidParameter("explicit h must lie in (0, 0.5]"));
        }
        self.h_override = Some(h);
        Ok(self)
    }

    pub fn with_known_l(mut self, l: f64) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidParameter("known l must be positive"));
        }
        self.l_known = Some(l);
        Ok(self)
    }
}

/// Outcome of bandwidth calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    /// Snapped step `h = 1/m`.
    pub h: f64,
    /// Cells per axis.
    pub m: usize,
    /// Whether `h > sqrt(log(1/h^d) / (n h^d))` holds at the snapped `h`.
    /// A violation signals an under-resolved histogram, not an error.
    pub eq2_ok: bool,
}

/// Chooses the grid step: target `c * (log n / n)^{1/(d+2α)}`, snapped to the
/// nearest reciprocal of an integer with a floor of two cells per axis.
pub fn calibrate_h(n: usize, dim: usize, alpha: f64, c: f64) -> Result<Calibration> {
    if n < 2 {
        return Err(Error::InvalidParameter("calibration needs at least 2 samples"));
    }
    if dim == 0 {
        return Err(Error::InvalidGrid("dimension must be at least 1"));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter("alpha must lie in (0, 1]"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter("calibration constant must be positive"));
    }
    let nf = n as f64;
    let target = c * math::powf(math::ln(nf) / nf, 1.0 / (dim as f64 + 2.0 * alpha));
    let m_raw = math::round(1.0 / target);
    let m = if m_raw < 2.0 { 2 } else { m_raw as usize };
    let h = 1.0 / m as f64;
    let hd = math::powf(h, dim as f64);
    let eq2_ok = h > math::sqrt(math::ln(1.0 / hd) / (nf * hd));
    Ok(Calibration { h, m, eq2_ok })
}

/// One estimated mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    /// Cell-center location in `[0,1]^d`.
    pub location: Vec<f64>,
    /// Estimated local-maximum value (the birth level).
    pub value: f64,
    /// Lifetime of the diagram point; infinite for essential classes.
    pub lifetime: f64,
    /// Birth cell of the underlying diagram point.
    pub birth_cell: usize,
}

/// Result of a mode-estimation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeEstimate {
    pub k_hat: usize,
    /// Modes sorted by decreasing value, ties by birth cell.
    pub modes: Vec<Mode>,
    /// The `l` (known path) or `l̂` (adaptive path) that was applied.
    pub threshold: f64,
    /// The full estimated diagram, before thresholding.
    pub diagram: PersistenceDiagram,
    pub grid: GridSpec,
    pub dilation_radius: usize,
}

/// Penalized truncation risk `R(l) = d_b(D, trunc_l D) + h^α / l`.
pub fn risk(d: &PersistenceDiagram, l: f64, h: f64, alpha: f64) -> Result<f64> {
    if !(l > 0.0) {
        return Err(Error::InvalidParameter("risk threshold l must be positive"));
    }
    Ok(bottleneck(d, &truncate(d, l)) + math::powf(h, alpha) / l)
}

/// Minimizes the left-limit risk over the candidate set.
///
/// Candidates are the distinct finite lifetimes in `(0, 1]` plus `1`; each is
/// scored as `bottleneck(D, keep{lifetime >= L}) + h^α / L` (the non-strict
/// keep realizes the infimum of `R` over `l ↑ L`). Ties go to the largest
/// candidate, favoring fewer, more persistent modes.
pub fn select_l(d: &PersistenceDiagram, h: f64, alpha: f64) -> Result<f64> {
    if d.is_empty() {
        return Err(Error::EmptyDiagram);
    }
    let mut candidates: Vec<f64> = d
        .finite_points()
        .map(|p| p.lifetime())
        .filter(|&l| l > 0.0 && l <= 1.0)
        .collect();
    candidates.push(1.0);
    candidates.sort_unstable_by(f64::total_cmp);
    candidates.dedup();

    let penalty = math::powf(h, alpha);
    let mut best_l = candidates[0];
    let mut best_r = f64::INFINITY;
    for &l in &candidates {
        let r = bottleneck(d, &keep_at_least(d, l)) + penalty / l;
        if r <= best_r {
            best_r = r;
            best_l = l;
        }
    }
    Ok(best_l)
}

/// Sub-diagram selected by the known-threshold rule: essential points plus
/// lifetimes strictly above `l/2`.
pub fn threshold_known_l(d: &PersistenceDiagram, l: f64) -> Result<PersistenceDiagram> {
    if !(l > 0.0) {
        return Err(Error::InvalidParameter("known l must be positive"));
    }
    let kept: Vec<PersistencePoint> =
        d.points().iter().filter(|p| p.essential || p.lifetime() > l / 2.0).copied().collect();
    PersistenceDiagram::from_points(kept, d.grid())
}

/// Sub-diagram selected by the adaptive rule: essential points plus
/// lifetimes at or above `l_hat`.
pub fn threshold_adaptive(d: &PersistenceDiagram, l_hat: f64) -> PersistenceDiagram {
    keep_at_least(d, l_hat)
}

struct Pipeline {
    grid: GridSpec,
    raw: CellField,
    radius: usize,
    diagram: PersistenceDiagram,
}

fn run_pipeline(samples: &SampleSet, cfg: &EstimatorConfig) -> Result<Pipeline> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let dim = samples.dim();
    let m = match cfg.h_override {
        Some(h) => {
            let m = math::round(1.0 / h);
            if m < 2.0 {
                2
            } else {
                m as usize
            }
        }
        None => calibrate_h(samples.len(), dim, cfg.alpha, cfg.h_const)?.m,
    };
    let grid = GridSpec::new(dim, m)?;
    let raw = CellField::histogram(samples, grid)?;
    let radius = dilation_radius(dim, cfg.mu)?;
    let diagram = superlevel_diagram(&raw.dilate_max(radius));
    Ok(Pipeline { grid, raw, radius, diagram })
}

/// Mode location for one selected diagram point: the center of the cell of
/// maximal raw (pre-dilation) histogram value within radius `k` of the birth
/// cell. That cell realizes the dilated birth value, lies in the component at
/// its birth level, and is the point of maximal estimated density there.
fn mode_location(pipeline: &Pipeline, p: &PersistencePoint) -> (Vec<f64>, usize) {
    let grid = pipeline.grid;
    let k = pipeline.radius;
    let m = grid.cells_per_axis();
    let values = pipeline.raw.values();
    let center_multi = grid.multi_index(p.birth_cell);

    let dim = grid.dim();
    let mut best_cell = p.birth_cell;
    let mut best_val = f64::NEG_INFINITY;
    // walk the window [c_i - k, c_i + k] per axis
    let mut lo = vec![0usize; dim];
    let mut hi = vec![0usize; dim];
    for axis in 0..dim {
        lo[axis] = center_multi[axis].saturating_sub(k);
        hi[axis] = (center_multi[axis] + k).min(m - 1);
    }
    let mut cur = lo.clone();
    loop {
        let flat = grid.flat_index(&cur);
        let v = values[flat];
        if v > best_val || (v == best_val && flat < best_cell) {
            best_val = v;
            best_cell = flat;
        }
        let mut axis = dim;
        loop {
            if axis == 0 {
                return (grid.cell_center(best_cell), best_cell);
            }
            axis -= 1;
            if cur[axis] < hi[axis] {
                cur[axis] += 1;
                break;
            }
            cur[axis] = lo[axis];
        }
    }
}

fn build_estimate(pipeline: Pipeline, selected: PersistenceDiagram, threshold: f64) -> ModeEstimate {
    let mut modes: Vec<Mode> = selected
        .points()
        .iter()
        .map(|p| {
            let (location, _cell) = mode_location(&pipeline, p);
            Mode {
                location,
                value: p.birth,
                lifetime: if p.essential { f64::INFINITY } else { p.lifetime() },
                birth_cell: p.birth_cell,
            }
        })
        .collect();
    modes.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.birth_cell.cmp(&b.birth_cell)));
    ModeEstimate {
        k_hat: modes.len(),
        modes,
        threshold,
        diagram: pipeline.diagram,
        grid: pipeline.grid,
        dilation_radius: pipeline.radius,
    }
}

/// Mode estimation with a known separation threshold `l`: keeps diagram
/// points with lifetime strictly above `l/2` (essential classes always
/// qualify).
pub fn estimate_modes_known_l(samples: &SampleSet, cfg: &EstimatorConfig) -> Result<ModeEstimate> {
    let l = cfg
        .l_known
        .ok_or(Error::InvalidParameter("known-l estimation requires l_known"))?;
    let pipeline = run_pipeline(samples, cfg)?;
    let selected = threshold_known_l(&pipeline.diagram, l)?;
    Ok(build_estimate(pipeline, selected, l))
}

/// Mode estimation with the penalized adaptive threshold: selects `l̂` by
/// [`select_l`] and keeps diagram points with lifetime at or above it.
pub fn estimate_modes_adaptive(samples: &SampleSet, cfg: &EstimatorConfig) -> Result<ModeEstimate> {
    let pipeline = run_pipeline(samples, cfg)?;
    let h = pipeline.grid.h();
    let l_hat = select_l(&pipeline.diagram, h, cfg.alpha)?;
    let selected = threshold_adaptive(&pipeline.diagram, l_hat);
    Ok(build_estimate(pipeline, selected, l_hat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persistence::PersistencePoint;

    fn diagram(finite: &[(f64, f64)], essentials: &[f64]) -> PersistenceDiagram {
        let mut pts: Vec<PersistencePoint> = finite
            .iter()
            .map(|&(b, d)| PersistencePoint { birth: b, death: d, birth_cell: 0, essential: false })
            .collect();
        pts.extend(essentials.iter().map(|&b| PersistencePoint {
            birth: b,
            death: 0.0,
            birth_cell: 0,
            essential: true,
        }));
        PersistenceDiagram::from_points(pts, None).unwrap()
    }

    #[test]
    fn calibrate_reproduces_paper_settings() {
        // 2D bumps: h = (log n / n)^{1/3} / 6 at n = 10^4
        let c = calibrate_h(10_000, 2, 0.5, 1.0 / 6.0).unwrap();
        assert_eq!(c.m, 62);
        assert_eq!(c.h, 1.0 / 62.0);
        // 1D: h = (log n / n)^{1/2} / 4 at n = 10^3
        let c = calibrate_h(1_000, 1, 0.5, 0.25).unwrap();
        assert_eq!(c.m, 48);
        // clamp to the 2-cell floor when the target step is huge
        let c = calibrate_h(100, 1, 0.5, 50.0).unwrap();
        assert_eq!(c.m, 2);
        assert!(calibrate_h(1, 1, 0.5, 0.25).is_err());
    }

    #[test]
    fn risk_examples() {
        // no point at or below l: truncation is the identity
        let d = diagram(&[(2.0, 1.0)], &[3.0]);
        let r = risk(&d, 0.5, 0.05 * 0.05, 0.5).unwrap(); // h^alpha = 0.05
        assert!((r - 0.05 / 0.5).abs() < 1e-12);

        // removed half-life 0.05 plus penalty 0.05/0.2
        let d = diagram(&[(2.0, 1.9)], &[3.0]);
        let r = risk(&d, 0.2, 0.05 * 0.05, 0.5).unwrap();
        assert!((r - 0.30).abs() < 1e-12);

        assert!(risk(&d, 0.0, 0.1, 0.5).is_err());
    }

    #[test]
    fn select_l_spec_example() {
        // lifetimes {0.02, 0.5} plus an essential, h^alpha = 0.05
        let d = diagram(&[(1.0, 0.98), (2.0, 1.5)], &[3.0]);
        let l_hat = select_l(&d, 0.05 * 0.05, 0.5).unwrap();
        assert_eq!(l_hat, 0.5);
        let k = threshold_adaptive(&d, l_hat).points().len();
        assert_eq!(k, 2); // one surviving finite point + the essential
    }

    #[test]
    fn select_l_all_lifetimes_above_one() {
        let d = diagram(&[(2.0, 0.5)], &[3.0]);
        let l_hat = select_l(&d, 0.1, 0.5).unwrap();
        assert_eq!(l_hat, 1.0);
    }

    #[test]
    fn select_l_returns_candidate_minimizer() {
        let d = diagram(&[(1.0, 0.9), (2.0, 1.6), (2.5, 1.7)], &[3.0]);
        let h = 0.02;
        let alpha = 0.5;
        let l_hat = select_l(&d, h, alpha).unwrap();
        let mut cands: Vec<f64> = d
            .finite_points()
            .map(|p| p.lifetime())
            .filter(|&l| l > 0.0 && l <= 1.0)
            .collect();
        cands.push(1.0);
        assert!(cands.iter().any(|&c| c == l_hat));
        let score = |l: f64| bottleneck(&d, &keep_at_least(&d, l)) + crate::math::powf(h, alpha) / l;
        for &c in &cands {
            assert!(score(l_hat) <= score(c) + 1e-15);
        }
    }

    #[test]
    fn known_l_threshold_limit() {
        // l -> 0+ keeps every positive-lifetime point
        let d = diagram(&[(1.0, 0.99), (2.0, 1.0)], &[3.0]);
        let kept = threshold_known_l(&d, 1e-12).unwrap();
        assert_eq!(kept.points().len(), 3);
    }

    #[test]
    fn scale_equivariance_of_known_l() {
        let d = diagram(&[(1.0, 0.8), (2.0, 1.1)], &[3.0]);
        let k1 = threshold_known_l(&d, 0.5).unwrap().points().len();
        let scaled = diagram(&[(3.0, 2.4), (6.0, 3.3)], &[9.0]);
        let k2 = threshold_known_l(&scaled, 1.5).unwrap().points().len();
        assert_eq!(k1, k2);
    }

    #[test]
    fn known_l_and_adaptive_agree_across_gap() {
        // lifetime gap (0.1, 0.8]: l/2 = 0.3 and l_hat = 0.8 fall in the same gap
        let d = diagram(&[(1.0, 0.9), (2.0, 1.2)], &[3.0]);
        let k_known = threshold_known_l(&d, 0.6).unwrap().points().len();
        let l_hat = select_l(&d, 0.01, 0.5).unwrap();
        assert_eq!(l_hat, 0.8);
        let k_adaptive = threshold_adaptive(&d, l_hat).points().len();
        assert_eq!(k_known, k_adaptive);
    }

    #[test]
    fn estimator_requires_l_for_known_path() {
        let cfg = EstimatorConfig::new(0.5, 1.0, 0.25).unwrap();
        let samples = SampleSet::new(1, vec![0.1, 0.6, 0.7]).unwrap();
        assert!(estimate_modes_known_l(&samples, &cfg).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(EstimatorConfig::new(0.0, 1.0, 0.25).is_err());
        assert!(EstimatorConfig::new(0.5, 1.5, 0.25).is_err());
        assert!(EstimatorConfig::new(0.5, 1.0, 0.0).is_err());
        assert!(EstimatorConfig::new(0.5, 1.0, 0.25).unwrap().with_h(0.7).is_err());
        assert!(EstimatorConfig::new(0.5, 1.0, 0.25).unwrap().with_known_l(-1.0).is_err());
    }
}
