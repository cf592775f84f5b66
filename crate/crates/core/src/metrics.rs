//! Diagram and mode-set metrics: exact bottleneck distance, diagram
//! truncation, the zero-padded matching distance and the Hausdorff distance.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::persistence::{PersistenceDiagram, PersistencePoint};
use crate::Result;

/// A finite multiset of vectors (mode locations, or scalar local-max values
/// as one-dimensional vectors). Duplicates are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    dim: usize,
    coords: Vec<f64>,
}

impl ModeSet {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("mode-set dimension must be at least 1"));
        }
        if coords.len() % dim != 0 {
            return Err(Error::InvalidParameter(
                "coordinate count is not a multiple of the dimension",
            ));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("mode coordinates must be finite"));
        }
        Ok(ModeSet { dim, coords })
    }

    pub fn from_points(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
            coords.extend_from_slice(p);
        }
        ModeSet::new(dim, coords)
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
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn pair_cost(p: &PersistencePoint, q: &PersistencePoint) -> f64 {
    (p.birth - q.birth).abs().max((p.death - q.death).abs())
}

fn diag_cost(p: &PersistencePoint) -> f64 {
    (p.birth - p.death) / 2.0
}

/// Min-max bijection cost between two equal-length sorted scalar lists.
/// Order-preserving matching is optimal for the max metric on the line.
fn sorted_linf_match(a: &mut Vec<f64>, b: &mut Vec<f64>) -> f64 {
    a.sort_unstable_by(f64::total_cmp);
    b.sort_unstable_by(f64::total_cmp);
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Bipartite matcher over an implicit edge predicate, Kuhn's augmenting paths.
struct Matcher {
    match_left: Vec<Option<usize>>,
    match_right: Vec<Option<usize>>,
    visited: Vec<bool>,
}

impl Matcher {
    fn new(n_left: usize, n_right: usize) -> Self {
        Matcher {
            match_left: vec![None; n_left],
            match_right: vec![None; n_right],
            visited: vec![false; n_right],
        }
    }

    fn augment<F>(&mut self, u: usize, adj: &F) -> bool
    where
        F: Fn(usize, usize) -> bool,
    {
        for r in 0..self.match_right.len() {
            if self.visited[r] || !adj(u, r) {
                continue;
            }
            self.visited[r] = true;
            let occupant = self.match_right[r];
            let ok = match occupant {
                None => true,
                Some(v) => self.augment(v, adj),
            };
            if ok {
                self.match_right[r] = Some(u);
                self.match_left[u] = Some(r);
                return true;
            }
        }
        false
    }
}

/// Feasibility of a perfect matching at threshold `t` in the diagram-plus-
/// diagonal bipartite graph. Left nodes: points of `a` then one diagonal slot
/// per point of `b`; right nodes: points of `b` then one diagonal slot per
/// point of `a`. Low points are pre-matched to diagonal slots and Kuhn
/// augments only from the leftovers.
fn feasible(a: &[PersistencePoint], b: &[PersistencePoint], t: f64) -> Option<Matcher> {
    let na = a.len();
    let nb = b.len();
    let adj = |u: usize, r: usize| -> bool {
        match (u < na, r < nb) {
            (true, true) => pair_cost(&a[u], &b[r]) <= t,
            (true, false) => diag_cost(&a[u]) <= t,
            (false, true) => diag_cost(&b[r]) <= t,
            (false, false) => true,
        }
    };
    let mut m = Matcher::new(na + nb, nb + na);
    // pre-match everything that can rest on the diagonal
    for i in 0..na {
        if diag_cost(&a[i]) <= t {
            m.match_left[i] = Some(nb + i);
            m.match_right[nb + i] = Some(i);
        }
    }
    for j in 0..nb {
        if diag_cost(&b[j]) <= t {
            m.match_left[na + j] = Some(j);
            m.match_right[j] = Some(na + j);
        }
    }
    // pair up leftover diagonal slots (diagonal-diagonal edges are free)
    let free_left: Vec<usize> =
        (0..na + nb).filter(|&u| u >= na && m.match_left[u].is_none()).collect();
    let free_right: Vec<usize> =
        (0..nb + na).filter(|&r| r >= nb && m.match_right[r].is_none()).collect();
    for (&u, &r) in free_left.iter().zip(free_right.iter()) {
        m.match_left[u] = Some(r);
        m.match_right[r] = Some(u);
    }
    for u in 0..na + nb {
        if m.match_left[u].is_some() {
            continue;
        }
        m.visited.iter_mut().for_each(|v| *v = false);
        if !m.augment(u, &adj) {
            return None;
        }
    }
    Some(m)
}

fn bottleneck_finite(a: &[PersistencePoint], b: &[PersistencePoint]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let mut cand: Vec<f64> = Vec::with_capacity(a.len() * b.len() + a.len() + b.len() + 1);
    cand.push(0.0);
    cand.extend(a.iter().map(diag_cost));
    cand.extend(b.iter().map(diag_cost));
    for p in a {
        for q in b {
            cand.push(pair_cost(p, q));
        }
    }
    cand.sort_unstable_by(f64::total_cmp);
    cand.dedup();
    let mut lo = 0usize;
    let mut hi = cand.len() - 1; // max candidate >= every diagonal cost: feasible
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if feasible(a, b, cand[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    cand[lo]
}

fn split(d: &PersistenceDiagram) -> (Vec<PersistencePoint>, Vec<f64>) {
    let mut finite = Vec::new();
    let mut essential = Vec::new();
    for p in d.points() {
        if p.essential {
            essential.push(p.birth);
        } else {
            finite.push(*p);
        }
    }
    (finite, essential)
}

/// Exact bottleneck distance between two diagrams.
///
/// Essential classes form a separate matching class at cost `|b1 - b2|`; when
/// the essential counts differ the distance is infinite. Non-essential points
/// match each other at cost `max(|Δbirth|, |Δdeath|)` or the diagonal at cost
/// `(birth - death)/2`; the exact optimum is found by binary search over the
/// candidate costs with a maximum-matching feasibility test.
pub fn bottleneck(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> f64 {
    let (fa, mut ea) = split(d1);
    let (fb, mut eb) = split(d2);
    if ea.len() != eb.len() {
        return f64::INFINITY;
    }
    let e_cost = sorted_linf_match(&mut ea, &mut eb);
    e_cost.max(bottleneck_finite(&fa, &fb))
}

/// Point-count cap per diagram for [`bottleneck_exhaustive`].
pub const EXHAUSTIVE_MAX_POINTS: usize = 7;

/// Factorial brute-force oracle for [`bottleneck`], enumerating every
/// matching (diagonal included) over diagrams of at most
/// [`EXHAUSTIVE_MAX_POINTS`] points per class. Testing oracle only.
pub fn bottleneck_exhaustive(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> Result<f64> {
    let (fa, ea) = split(d1);
    let (fb, eb) = split(d2);
    if fa.len().max(fb.len()) > EXHAUSTIVE_MAX_POINTS
        || ea.len().max(eb.len()) > EXHAUSTIVE_MAX_POINTS
    {
        return Err(Error::InvalidParameter("exhaustive oracle is gated to 7 points per diagram"));
    }
    if ea.len() != eb.len() {
        return Ok(f64::INFINITY);
    }

    fn perm_min_max(a: &[f64], b: &[f64], used: &mut [bool], i: usize, cur: f64, best: &mut f64) {
        if cur >= *best {
            return;
        }
        if i == a.len() {
            *best = cur;
            return;
        }
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                perm_min_max(a, b, used, i + 1, cur.max((a[i] - b[j]).abs()), best);
                used[j] = false;
            }
        }
    }

    let mut e_best = 0.0f64;
    if !ea.is_empty() {
        e_best = f64::INFINITY;
        let mut used = vec![false; eb.len()];
        perm_min_max(&ea, &eb, &mut used, 0, 0.0, &mut e_best);
    }

    fn finite_min_max(
        a: &[PersistencePoint],
        b: &[PersistencePoint],
        used: &mut [bool],
        i: usize,
        cur: f64,
        best: &mut f64,
    ) {
        if cur >= *best {
            return;
        }
        if i == a.len() {
            // every unused b point goes to the diagonal
            let mut total = cur;
            for (j, q) in b.iter().enumerate() {
                if !used[j] {
                    total = total.max(diag_cost(q));
                }
            }
            if total < *best {
                *best = total;
            }
            return;
        }
        // a[i] to the diagonal
        finite_min_max(a, b, used, i + 1, cur.max(diag_cost(&a[i])), best);
        // a[i] to an unused b point
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                finite_min_max(a, b, used, i + 1, cur.max(pair_cost(&a[i], &b[j])), best);
                used[j] = false;
            }
        }
    }

    let mut f_best = f64::INFINITY;
    let mut used = vec![false; fb.len()];
    finite_min_max(&fa, &fb, &mut used, 0, 0.0, &mut f_best);

    Ok(e_best.max(f_best))
}

/// Removes non-essential points with lifetime at most `l`; essential points
/// are always kept.
///
/// Panics if `l <= 0`.
pub fn truncate(d: &PersistenceDiagram, l: f64) -> PersistenceDiagram {
    assert!(l > 0.0, "truncation threshold must be positive");
    let kept: Vec<PersistencePoint> =
        d.points().iter().filter(|p| p.essential || p.lifetime() > l).copied().collect();
    PersistenceDiagram::from_points(kept, d.grid()).expect("subset of a valid diagram")
}

/// Keeps essential points and non-essential points with lifetime `>= l`
/// (non-strict); the left-limit form used by the adaptive threshold.
pub fn keep_at_least(d: &PersistenceDiagram, l: f64) -> PersistenceDiagram {
    let kept: Vec<PersistencePoint> =
        d.points().iter().filter(|p| p.essential || p.lifetime() >= l).copied().collect();
    PersistenceDiagram::from_points(kept, d.grid()).expect("subset of a valid diagram")
}

fn padded_cost(a: &ModeSet, b: &ModeSet, zero: &[f64], i: usize, j: usize) -> f64 {
    let p = if i < a.len() { a.point(i) } else { zero };
    let q = if j < b.len() { b.point(j) } else { zero };
    linf(p, q)
}

fn matching_core(a: &ModeSet, b: &ModeSet) -> Result<(f64, Vec<(usize, usize)>)> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    let n = a.len().max(b.len());
    if n == 0 {
        return Ok((0.0, Vec::new()));
    }
    let zero = vec![0.0f64; a.dim()];
    let mut cand = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            cand.push(padded_cost(a, b, &zero, i, j));
        }
    }
    cand.sort_unstable_by(f64::total_cmp);
    cand.dedup();

    let try_match = |t: f64| -> Option<Matcher> {
        let adj = |i: usize, j: usize| padded_cost(a, b, &zero, i, j) <= t;
        let mut m = Matcher::new(n, n);
        for u in 0..n {
            m.visited.iter_mut().for_each(|v| *v = false);
            if !m.augment(u, &adj) {
                return None;
            }
        }
        Some(m)
    };

    let mut lo = 0usize;
    let mut hi = cand.len() - 1;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if try_match(cand[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let t = cand[lo];
    let m = try_match(t).expect("threshold verified feasible");
    let pairs = m
        .match_left
        .iter()
        .enumerate()
        .map(|(i, r)| (i, r.expect("perfect matching")))
        .collect();
    Ok((t, pairs))
}

/// Matching distance between two mode sets: the smaller set is padded with
/// zero vectors and the cost is the min over bijections of the max L∞
/// displacement. Unmatched elements therefore cost their own L∞ norm.
pub fn matching_distance(a: &ModeSet, b: &ModeSet) -> Result<f64> {
    matching_core(a, b).map(|(d, _)| d)
}

/// [`matching_distance`] together with the realized bijection. Entries are
/// `(left, right)` with `None` marking a padded zero vector.
pub fn matching_assignment(
    a: &ModeSet,
    b: &ModeSet,
) -> Result<(f64, Vec<(Option<usize>, Option<usize>)>)> {
    let (d, pairs) = matching_core(a, b)?;
    let assignment = pairs
        .into_iter()
        .map(|(i, j)| ((i < a.len()).then_some(i), (j < b.len()).then_some(j)))
        .collect();
    Ok((d, assignment))
}

/// Hausdorff distance between two nonempty mode sets under the L∞ norm.
pub fn hausdorff(a: &ModeSet, b: &ModeSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyModeSet);
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    let directed = |from: &ModeSet, to: &ModeSet| -> f64 {
        from.iter()
            .map(|p| to.iter().map(|q| linf(p, q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(directed(a, b).max(directed(b, a)))
}
