//! H0 persistence of the superlevel-set filtration of a cell field.
//!
//! Two routes compute the same diagram: [`superlevel_diagram`] processes cells
//! in decreasing value order with a union-find and the elder rule, and
//! [`brute_force_diagram`] re-derives components level by level with BFS. The
//! second exists purely as a testing oracle for the first.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::grid::{dilation_radius, CellField, GridSpec, SampleSet};
use crate::Result;

/// One class of the H0 superlevel filtration.
///
/// Superlevel convention: components appear at high levels and die at lower
/// ones, so `birth >= death >= 0` and the lifetime is `birth - death`. The
/// class that never dies carries `essential = true` and `death = 0`, the level
/// at which every non-negative field merges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePoint {
    pub birth: f64,
    pub death: f64,
    /// Flat index of the cell at which the component appeared.
    pub birth_cell: usize,
    pub essential: bool,
}

impl PersistencePoint {
    /// `birth - death`; for essential classes this is the birth level, and
    /// thresholding code treats their lifetime as infinite instead.
    pub fn lifetime(&self) -> f64 {
        self.birth - self.death
    }
}

/// Multiset of persistence points, canonically ordered.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    points: Vec<PersistencePoint>,
    grid: Option<GridSpec>,
}

impl PersistenceDiagram {
    /// Builds a diagram from raw points (analytic or synthetic diagrams have
    /// no grid provenance). Rejects points with `birth < death` or negative
    /// deaths.
    pub fn from_points(points: Vec<PersistencePoint>, grid: Option<GridSpec>) -> Result<Self> {
        for p in &points {
            if !(p.birth.is_finite() && p.death.is_finite()) || p.birth < p.death || p.death < 0.0
            {
                return Err(Error::InvalidParameter(
                    "diagram points need finite birth >= death >= 0",
                ));
            }
        }
        let mut d = PersistenceDiagram { points, grid };
        d.canonicalize();
        Ok(d)
    }

    fn canonicalize(&mut self) {
        self.points.sort_unstable_by(|a, b| {
            b.essential
                .cmp(&a.essential)
                .then(b.birth.total_cmp(&a.birth))
                .then(b.death.total_cmp(&a.death))
                .then(a.birth_cell.cmp(&b.birth_cell))
        });
    }

    pub fn points(&self) -> &[PersistencePoint] {
        &self.points
    }

    pub fn grid(&self) -> Option<GridSpec> {
        self.grid
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn essential_count(&self) -> usize {
        self.points.iter().filter(|p| p.essential).count()
    }

    /// Non-essential points.
    pub fn finite_points(&self) -> impl Iterator<Item = &PersistencePoint> {
        self.points.iter().filter(|p| !p.essential)
    }

    /// Multiset equality on `(birth, death, essential)` plus `birth_cell`
    /// agreement for the essential classes.
    pub fn same_multiset(&self, other: &PersistenceDiagram) -> bool {
        if self.points.len() != other.points.len() {
            return false;
        }
        let key = |p: &PersistencePoint| {
            (
                p.essential,
                p.birth.to_bits(),
                p.death.to_bits(),
                if p.essential { p.birth_cell } else { usize::MAX },
            )
        };
        let mut a: Vec<_> = self.points.iter().map(key).collect();
        let mut b: Vec<_> = other.points.iter().map(key).collect();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }
}

/// Offsets of the Chebyshev neighborhood (all multi-indices at L∞ distance 1).
fn neighbor_offsets(dim: usize) -> Vec<Vec<isize>> {
    let mut offsets = Vec::new();
    let mut cur = vec![-1isize; dim];
    loop {
        if cur.iter().any(|&d| d != 0) {
            offsets.push(cur.clone());
        }
        let mut axis = dim;
        loop {
            if axis == 0 {
                return offsets;
            }
            axis -= 1;
            if cur[axis] < 1 {
                cur[axis] += 1;
                break;
            }
            cur[axis] = -1;
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: vec![usize::MAX; n] }
    }

    fn activate(&mut self, c: usize) {
        self.parent[c] = c;
    }

    fn is_active(&self, c: usize) -> bool {
        self.parent[c] != usize::MAX
    }

    fn find(&mut self, mut c: usize) -> usize {
        let mut root = c;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[c] != root {
            let next = self.parent[c];
            self.parent[c] = root;
            c = next;
        }
        root
    }
}

/// H0 persistence diagram of the superlevel filtration of `field`.
///
/// Cells are adjacent when their multi-indices differ by at most one in every
/// coordinate (closed cubes sharing any boundary point touch). Cells are
/// processed in decreasing value order, ties by ascending flat index; on a
/// merge the younger component dies (smaller birth, tie: larger birth cell)
/// and zero-persistence pairs are dropped. Every surviving root becomes an
/// essential point with death 0.
pub fn superlevel_diagram(field: &CellField) -> PersistenceDiagram {
    diagram_with_drop_count(field).0
}

/// Same as [`superlevel_diagram`], additionally counting dropped
/// zero-persistence merges (births equal to the merge level).
fn diagram_with_drop_count(field: &CellField) -> (PersistenceDiagram, usize) {
    let grid = field.grid();
    let values = field.values();
    let n = grid.total_cells();
    let dim = grid.dim();
    let m = grid.cells_per_axis();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));

    let offsets = neighbor_offsets(dim);
    let mut uf = UnionFind::new(n);
    // birth level and birth cell, valid at root indices
    let mut birth_value = vec![0.0f64; n];
    let mut birth_cell = vec![0usize; n];

    let mut points = Vec::new();
    let mut dropped = 0usize;
    let mut multi = vec![0usize; dim];
    let mut roots: Vec<usize> = Vec::with_capacity(offsets.len());

    for &c in &order {
        let level = values[c];
        grid.multi_index_into(c, &mut multi);
        roots.clear();
        'outer: for off in &offsets {
            let mut flat = 0usize;
            for axis in 0..dim {
                let coord = multi[axis] as isize + off[axis];
                if coord < 0 || coord >= m as isize {
                    continue 'outer;
                }
                flat = flat * m + coord as usize;
            }
            if uf.is_active(flat) {
                let r = uf.find(flat);
                if !roots.contains(&r) {
                    roots.push(r);
                }
            }
        }
        if roots.is_empty() {
            // c starts its own component
            uf.activate(c);
            birth_value[c] = level;
            birth_cell[c] = c;
            continue;
        }
        // elder: larger birth, tie broken toward the smaller birth cell;
        // a root born at this level always has a smaller birth cell than c
        let mut winner = roots[0];
        for &r in &roots[1..] {
            let better = birth_value[r] > birth_value[winner]
                || (birth_value[r] == birth_value[winner] && birth_cell[r] < birth_cell[winner]);
            if better {
                winner = r;
            }
        }
        for &r in &roots {
            if r == winner {
                continue;
            }
            if birth_value[r] > level {
                points.push(PersistencePoint {
                    birth: birth_value[r],
                    death: level,
                    birth_cell: birth_cell[r],
                    essential: false,
                });
            } else {
                dropped += 1;
            }
            uf.parent[r] = winner;
        }
        uf.parent[c] = winner; // c joins, it never was a component
    }

    for c in 0..n {
        if uf.parent[c] == c {
            points.push(PersistencePoint {
                birth: birth_value[c],
                death: 0.0,
                birth_cell: birth_cell[c],
                essential: true,
            });
        }
    }

    let mut d = PersistenceDiagram { points, grid: Some(grid) };
    d.canonicalize();
    (d, dropped)
}

/// Cell-count cap for the brute-force oracle.
pub const BRUTE_FORCE_MAX_CELLS: usize = 10_000;

/// Level-sweep oracle for [`superlevel_diagram`].
///
/// Enumerates the distinct field values in decreasing order, recomputes the
/// connected components of each superlevel set by BFS under the same
/// adjacency, tracks component identity across levels by containment and
/// applies the elder rule with the same tie-breaks. Quadratic; gated to small
/// grids.
pub fn brute_force_diagram(field: &CellField) -> Result<PersistenceDiagram> {
    let grid = field.grid();
    let n = grid.total_cells();
    if n > BRUTE_FORCE_MAX_CELLS {
        return Err(Error::GridTooLarge { cells: n as u128, max: BRUTE_FORCE_MAX_CELLS as u128 });
    }
    let values = field.values();
    let dim = grid.dim();
    let m = grid.cells_per_axis();
    let offsets = neighbor_offsets(dim);

    let mut levels: Vec<f64> = values.to_vec();
    levels.sort_unstable_by(|a, b| b.total_cmp(a));
    levels.dedup();

    // order of activation within the sweep
    let mut by_level: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for c in 0..n {
        by_level.entry(values[c].to_bits()).or_default().push(c);
    }

    #[derive(Clone)]
    struct Comp {
        birth: f64,
        birth_cell: usize,
        member: usize,
    }

    let mut active = vec![false; n];
    let mut comps: Vec<Comp> = Vec::new();
    let mut points = Vec::new();
    let mut label = vec![usize::MAX; n];
    let mut multi = vec![0usize; dim];

    for &level in &levels {
        for &c in by_level.get(&level.to_bits()).into_iter().flatten() {
            active[c] = true;
        }
        // relabel the superlevel set
        for l in label.iter_mut() {
            *l = usize::MAX;
        }
        let mut n_labels = 0usize;
        let mut label_cells: Vec<Vec<usize>> = Vec::new();
        let mut queue: Vec<usize> = Vec::new();
        for start in 0..n {
            if !active[start] || label[start] != usize::MAX {
                continue;
            }
            let lab = n_labels;
            n_labels += 1;
            label_cells.push(Vec::new());
            label[start] = lab;
            queue.clear();
            queue.push(start);
            while let Some(c) = queue.pop() {
                label_cells[lab].push(c);
                grid.multi_index_into(c, &mut multi);
                'nb: for off in &offsets {
                    let mut flat = 0usize;
                    for axis in 0..dim {
                        let coord = multi[axis] as isize + off[axis];
                        if coord < 0 || coord >= m as isize {
                            continue 'nb;
                        }
                        flat = flat * m + coord as usize;
                    }
                    if active[flat] && label[flat] == usize::MAX {
                        label[flat] = lab;
                        queue.push(flat);
                    }
                }
            }
        }
        // previous components by their new label
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n_labels];
        for (ci, comp) in comps.iter().enumerate() {
            groups[label[comp.member]].push(ci);
        }
        let mut next: Vec<Comp> = Vec::with_capacity(n_labels);
        for lab in 0..n_labels {
            let olds = &groups[lab];
            if olds.is_empty() {
                // brand-new component, all its cells were activated at this level
                let bc = *label_cells[lab].iter().min().unwrap();
                next.push(Comp { birth: level, birth_cell: bc, member: bc });
            } else {
                let mut winner = olds[0];
                for &ci in &olds[1..] {
                    let better = comps[ci].birth > comps[winner].birth
                        || (comps[ci].birth == comps[winner].birth
                            && comps[ci].birth_cell < comps[winner].birth_cell);
                    if better {
                        winner = ci;
                    }
                }
                for &ci in olds {
                    if ci != winner && comps[ci].birth > level {
                        points.push(PersistencePoint {
                            birth: comps[ci].birth,
                            death: level,
                            birth_cell: comps[ci].birth_cell,
                            essential: false,
                        });
                    }
                }
                next.push(Comp {
                    birth: comps[winner].birth,
                    birth_cell: comps[winner].birth_cell,
                    member: label_cells[lab][0],
                });
            }
        }
        comps = next;
    }

    for comp in &comps {
        points.push(PersistencePoint {
            birth: comp.birth,
            death: 0.0,
            birth_cell: comp.birth_cell,
            essential: true,
        });
    }

    let mut d = PersistenceDiagram { points, grid: Some(grid) };
    d.canonicalize();
    Ok(d)
}

/// Full estimation pipeline: histogram, dilation by `⌈√d/μ⌉`, diagram.
pub fn estimate_diagram(
    samples: &SampleSet,
    grid: GridSpec,
    mu: f64,
) -> Result<PersistenceDiagram> {
    let hist = CellField::histogram(samples, grid)?;
    let k = dilation_radius(grid.dim(), mu)?;
    Ok(superlevel_diagram(&hist.dilate_max(k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{CellField, GridSpec};
    use crate::rng::{stream, uniform01};
    use rand_chacha::rand_core::RngCore;

    fn field_1d(values: Vec<f64>) -> CellField {
        let g = GridSpec::new(1, values.len()).unwrap();
        CellField::from_values(g, values).unwrap()
    }

    #[test]
    fn elder_rule_hand_traceable() {
        let d = superlevel_diagram(&field_1d(vec![3.0, 1.0, 2.0]));
        assert_eq!(d.points().len(), 2);
        let ess: Vec<_> = d.points().iter().filter(|p| p.essential).collect();
        assert_eq!(ess.len(), 1);
        assert_eq!((ess[0].birth, ess[0].death, ess[0].birth_cell), (3.0, 0.0, 0));
        let fin: Vec<_> = d.finite_points().collect();
        assert_eq!((fin[0].birth, fin[0].death, fin[0].birth_cell), (2.0, 1.0, 2));
    }

    #[test]
    fn plateau_drops_zero_persistence() {
        let d = superlevel_diagram(&field_1d(vec![5.0, 5.0, 5.0]));
        assert_eq!(d.points().len(), 1);
        assert!(d.points()[0].essential);
        assert_eq!(d.points()[0].birth, 5.0);
        assert_eq!(d.points()[0].birth_cell, 0);
    }

    #[test]
    fn brute_force_matches_examples() {
        for values in [vec![3.0, 1.0, 2.0], vec![5.0, 5.0, 5.0], vec![1.0, 0.0, 1.0, 0.0, 1.0]] {
            let f = field_1d(values);
            let a = superlevel_diagram(&f);
            let b = brute_force_diagram(&f).unwrap();
            assert!(a.same_multiset(&b), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn brute_force_rejects_large_grids() {
        let g = GridSpec::new(2, 101).unwrap();
        let f = CellField::from_values(g, vec![0.0; g.total_cells()]).unwrap();
        assert!(matches!(brute_force_diagram(&f), Err(Error::GridTooLarge { .. })));
    }

    #[test]
    fn oracle_equivalence_random_fields() {
        let mut rng = stream(42);
        for trial in 0..120 {
            let (dim, m) = match trial % 3 {
                0 => (1, 6),
                1 => (2, 6),
                _ => (3, 4),
            };
            let g = GridSpec::new(dim, m).unwrap();
            let range = if trial % 2 == 0 { 4 } else { 12 };
            let values: Vec<f64> =
                (0..g.total_cells()).map(|_| (rng.next_u64() % range) as f64).collect();
            let f = CellField::from_values(g, values).unwrap();
            let fast = superlevel_diagram(&f);
            let slow = brute_force_diagram(&f).unwrap();
            assert!(fast.same_multiset(&slow), "mismatch on trial {trial}");
        }
    }

    #[test]
    fn monotone_shift_equivariance() {
        let mut rng = stream(7);
        for _ in 0..50 {
            let g = GridSpec::new(2, 5).unwrap();
            let values: Vec<f64> = (0..25).map(|_| uniform01(&mut rng) * 3.0).collect();
            let shifted: Vec<f64> = values.iter().map(|v| v + 1.5).collect();
            let d0 = superlevel_diagram(&CellField::from_values(g, values).unwrap());
            let d1 = superlevel_diagram(&CellField::from_values(g, shifted).unwrap());
            assert_eq!(d0.points().len(), d1.points().len());
            for (a, b) in d0.points().iter().zip(d1.points()) {
                assert!((b.birth - a.birth - 1.5).abs() < 1e-12);
                if !a.essential {
                    assert!((b.death - a.death - 1.5).abs() < 1e-12);
                }
                assert_eq!(a.birth_cell, b.birth_cell);
            }
        }
    }

    #[test]
    fn births_count_local_maxima() {
        // points with positive lifetime + dropped zero-persistence merges
        // = cells that are local maxima under the tie-broken processing order
        let mut rng = stream(99);
        for _ in 0..60 {
            let g = GridSpec::new(2, 5).unwrap();
            let values: Vec<f64> = (0..25).map(|_| (rng.next_u64() % 5) as f64).collect();
            let f = CellField::from_values(g, values.clone()).unwrap();
            let (d, dropped) = diagram_with_drop_count(&f);

            let offsets = neighbor_offsets(2);
            let mut local_max = 0usize;
            for c in 0..25 {
                let multi = g.multi_index(c);
                let mut is_max = true;
                'nb: for off in &offsets {
                    let mut flat = 0usize;
                    for axis in 0..2 {
                        let coord = multi[axis] as isize + off[axis];
                        if coord < 0 || coord >= 5 {
                            continue 'nb;
                        }
                        flat = flat * 5 + coord as usize;
                    }
                    // neighbor processed earlier: greater value, or equal value with smaller index
                    if values[flat] > values[c] || (values[flat] == values[c] && flat < c) {
                        is_max = false;
                        break;
                    }
                }
                if is_max {
                    local_max += 1;
                }
            }
            assert_eq!(d.points().len() + dropped, local_max);
        }
    }

    #[test]
    fn single_sample_diagram() {
        let g = GridSpec::new(1, 4).unwrap();
        let s = SampleSet::new(1, vec![0.3]).unwrap();
        let d = estimate_diagram(&s, g, 1.0).unwrap();
        assert_eq!(d.points().len(), 1);
        assert!(d.points()[0].essential);
        assert_eq!(d.points()[0].birth, 4.0); // 1/h^d = m
    }
}
