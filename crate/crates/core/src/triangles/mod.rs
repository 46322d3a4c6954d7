//! Maximal edge-disjoint sets of eligible open triangles.
//!
//! An open triangle `(u, w, v)` is eligible under a length view when none of its
//! three pairs is marked and `l(w,u) + l(w,v) + l(u,v) < L`. Lengths are handled
//! as natural logs; absent entries have length 1 (log 0).

mod greedy;
mod mis;
mod parallel;

pub use greedy::greedy_maximal;
pub use mis::{conflict_mis, MisOutcome};
pub use parallel::{parallel_maximal, parallel_maximal_with_stats, EngineStats, RoundTrace};

use std::fmt::Write as _;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::EnumerationGuard;
use crate::graph::{pair_key, EdgeId, OpenTriangle, SignedGraph, Vertex};
use crate::logspace::log_sum_exp3;

/// Guard for the naive enumerator: `m * n` must not exceed this.
pub const ENUMERATION_LIMIT: u64 = 10_000_000;

/// Log-lengths of edges. Positive edges are addressed by id, other pairs by endpoints.
pub trait EdgeLengths: Sync {
    fn positive_log(&self, e: EdgeId) -> f64;
    /// Log-length of a non-positive pair; 0 for pairs without stored length.
    fn negative_log(&self, u: Vertex, v: Vertex) -> f64;
}

/// Explicit length table, mostly for tests and the reduction demo.
#[derive(Debug, Clone, Default)]
pub struct LengthTable {
    positive: Vec<f64>,
    negative: FxHashMap<u64, f64>,
}

impl LengthTable {
    /// All lengths equal to 1.
    pub fn unit(g: &SignedGraph) -> Self {
        LengthTable { positive: vec![0.0; g.m()], negative: FxHashMap::default() }
    }

    /// Sets the (linear, >= 1) length of a positive edge.
    pub fn set_positive(&mut self, e: EdgeId, length: f64) {
        assert!(length >= 1.0, "lengths are at least 1");
        self.positive[e as usize] = length.ln();
    }

    /// Sets the (linear, >= 1) length of a non-positive pair.
    pub fn set_negative(&mut self, u: Vertex, v: Vertex, length: f64) {
        assert!(length >= 1.0, "lengths are at least 1");
        self.negative.insert(pair_key(u, v), length.ln());
    }

    /// Number of non-positive pairs with a stored length.
    pub fn negative_len(&self) -> usize {
        self.negative.len()
    }
}

impl EdgeLengths for LengthTable {
    #[inline]
    fn positive_log(&self, e: EdgeId) -> f64 {
        self.positive[e as usize]
    }

    #[inline]
    fn negative_log(&self, u: Vertex, v: Vertex) -> f64 {
        self.negative.get(&pair_key(u, v)).copied().unwrap_or(0.0)
    }
}

/// Lengths plus the eligibility limit `L` and pairs already consumed.
pub struct LengthView<'a> {
    pub lengths: &'a dyn EdgeLengths,
    /// `ln L`.
    pub limit_log: f64,
    /// Pair keys that no accepted triangle may use.
    pub marked: FxHashSet<u64>,
}

impl<'a> LengthView<'a> {
    pub fn new(lengths: &'a dyn EdgeLengths, limit: f64) -> Self {
        Self::with_log_limit(lengths, limit.ln())
    }

    pub fn with_log_limit(lengths: &'a dyn EdgeLengths, limit_log: f64) -> Self {
        LengthView { lengths, limit_log, marked: FxHashSet::default() }
    }

    pub fn with_marked(mut self, marked: impl IntoIterator<Item = (Vertex, Vertex)>) -> Self {
        self.marked.extend(marked.into_iter().map(|(u, v)| pair_key(u, v)));
        self
    }

    /// Log-length of any pair of `g`.
    pub fn pair_log(&self, g: &SignedGraph, u: Vertex, v: Vertex) -> f64 {
        match g.edge_id(u, v) {
            Some(e) => self.lengths.positive_log(e),
            None => self.lengths.negative_log(u, v),
        }
    }

    pub fn triangle_log_len(&self, g: &SignedGraph, t: &OpenTriangle) -> f64 {
        log_sum_exp3(self.pair_log(g, t.u, t.w), self.pair_log(g, t.w, t.v), self.lengths.negative_log(t.u, t.v))
    }

    /// Open in `g`, no marked pair, and strictly shorter than the limit.
    pub fn is_eligible(&self, g: &SignedGraph, t: &OpenTriangle) -> bool {
        t.is_open_in(g)
            && t.edge_keys().iter().all(|k| !self.marked.contains(k))
            && self.triangle_log_len(g, t) < self.limit_log
    }

    /// Whether a pair of positive edges at a center can still close an eligible
    /// triangle, i.e. `l(w,u) + l(w,v) + 1 < L`.
    #[inline]
    pub(crate) fn within_budget(&self, a: f64, b: f64) -> bool {
        log_sum_exp3(a, b, 0.0) < self.limit_log
    }
}

/// Edge-disjoint set of open triangles.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TriangleSet {
    triangles: Vec<OpenTriangle>,
    used: FxHashSet<u64>,
}

impl TriangleSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `t` if it shares no pair with the set; returns whether it was added.
    pub fn try_insert(&mut self, t: OpenTriangle) -> bool {
        let keys = t.edge_keys();
        if keys.iter().any(|k| self.used.contains(k)) {
            return false;
        }
        self.used.extend(keys);
        self.triangles.push(t);
        true
    }

    /// Builds a set without the disjointness check, for validating foreign output.
    pub fn from_unchecked(mut triangles: Vec<OpenTriangle>) -> Self {
        triangles.sort_unstable();
        let used = triangles.iter().flat_map(|t| t.edge_keys()).collect();
        TriangleSet { triangles, used }
    }

    pub(crate) fn sort(&mut self) {
        self.triangles.sort_unstable();
    }

    pub fn triangles(&self) -> &[OpenTriangle] {
        &self.triangles
    }

    pub fn used_edges(&self) -> &FxHashSet<u64> {
        &self.used
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Exact check that no pair is used twice.
    pub fn is_edge_disjoint(&self) -> bool {
        let mut seen = FxHashSet::default();
        self.triangles.iter().flat_map(|t| t.edge_keys()).all(|k| seen.insert(k))
    }

    /// Debug dump: one `u w v` line per triangle in canonical order.
    pub fn to_text(&self) -> String {
        let mut sorted = self.triangles.clone();
        sorted.sort_unstable();
        let mut out = String::new();
        for t in sorted {
            let _ = writeln!(out, "{} {} {}", t.u, t.w, t.v);
        }
        out
    }
}

/// Positive neighbor of a center together with the connecting edge.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Neighbor {
    pub log_len: f64,
    pub v: Vertex,
    pub edge: EdgeId,
}

impl Neighbor {
    /// Sort key: length, then vertex id.
    #[inline]
    pub fn key(&self) -> (f64, Vertex) {
        (self.log_len, self.v)
    }
}

#[inline]
pub(crate) fn key_cmp(a: (f64, Vertex), b: (f64, Vertex)) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Per-vertex neighbor lists sorted by `(length, id)`, skipping positive edges
/// that are already marked.
pub(crate) fn sorted_neighbors(g: &SignedGraph, view: &LengthView) -> Vec<Vec<Neighbor>> {
    let build = |w: &Vertex| {
        let mut list: Vec<Neighbor> = g
            .neighbors(*w)
            .iter()
            .zip(g.neighbor_edges(*w))
            .filter(|(&v, _)| view.marked.is_empty() || !view.marked.contains(&pair_key(*w, v)))
            .map(|(&v, &e)| Neighbor { log_len: view.lengths.positive_log(e), v, edge: e })
            .collect();
        list.sort_unstable_by(|a, b| key_cmp(a.key(), b.key()));
        list
    };
    let vertices: Vec<Vertex> = (0..g.n() as Vertex).collect();
    crate::par::map(&vertices, build)
}

/// Every eligible open triangle, in canonical order. Naive `O(sum deg^2)` scan.
pub fn enumerate_eligible(g: &SignedGraph, view: &LengthView) -> Result<Vec<OpenTriangle>, EnumerationGuard> {
    let work = g.m() as u64 * g.n() as u64;
    if work > ENUMERATION_LIMIT {
        return Err(EnumerationGuard { work, limit: ENUMERATION_LIMIT });
    }
    let mut out = Vec::new();
    g.for_each_open_triangle(|u, w, v| {
        let t = OpenTriangle::new(u, w, v);
        if view.is_eligible(g, &t) {
            out.push(t);
        }
    });
    out.sort_unstable();
    Ok(out)
}


#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;

    #[test]
    fn path_eligibility_boundary() {
        let g = path3();
        let unit = LengthTable::unit(&g);
        let view = LengthView::new(&unit, 3.3);
        assert_eq!(enumerate_eligible(&g, &view).unwrap(), vec![OpenTriangle::new(0, 1, 2)]);
        // Length exactly 3 is not strictly below L = 3.
        let view = LengthView::new(&unit, 3.0);
        assert!(enumerate_eligible(&g, &view).unwrap().is_empty());
    }

    #[test]
    fn star_has_three_eligible_triangles() {
        let g = star3();
        let unit = LengthTable::unit(&g);
        let view = LengthView::new(&unit, 4.0);
        let ts = enumerate_eligible(&g, &view).unwrap();
        // Hand check: every pair of leaves closes an open triangle at the center.
        let mut brute = Vec::new();
        for a in 1..4 {
            for b in a + 1..4 {
                brute.push(OpenTriangle::new(a, 0, b));
            }
        }
        assert_eq!(ts, brute);
    }

    #[test]
    fn marked_and_long_edges_disqualify() {
        let g = star3();
        let mut table = LengthTable::unit(&g);
        table.set_negative(1, 2, 5.0);
        let view = LengthView::new(&table, 4.0).with_marked([(0, 3)]);
        assert!(enumerate_eligible(&g, &view).unwrap().is_empty());
    }

    #[test]
    fn triangle_set_rejects_overlap() {
        let mut s = TriangleSet::new();
        assert!(s.try_insert(OpenTriangle::new(1, 0, 2)));
        assert!(!s.try_insert(OpenTriangle::new(1, 0, 3)));
        assert!(s.is_edge_disjoint());
        let bad = TriangleSet::from_unchecked(vec![OpenTriangle::new(1, 0, 2), OpenTriangle::new(1, 0, 3)]);
        assert!(!bad.is_edge_disjoint());
        assert_eq!(s.to_text(), "1 0 2\n");
    }

    #[test]
    fn enumeration_guard() {
        let g = SignedGraph::from_edges(5000, (0..2500).map(|i| (2 * i, 2 * i + 1))).unwrap();
        let unit = LengthTable::unit(&g);
        let view = LengthView::new(&unit, 4.0);
        assert!(enumerate_eligible(&g, &view).is_err());
    }
}
