use rustc_hash::FxHashSet;

use super::{sorted_neighbors, LengthView, TriangleSet};
use crate::graph::{pair_key, OpenTriangle, SignedGraph, Vertex};
use crate::logspace::log_sum_exp3;

/// Sequential greedy baseline.
///
/// For every positive edge `(w, u)` the incident edges `(w, v)` that follow `u`
/// in `(length, id)` order are scanned until `l(w,u) + l(w,v) + 1 >= L`. The
/// first eligible triangle found is taken and its two positive edges removed.
pub fn greedy_maximal(g: &SignedGraph, view: &LengthView) -> TriangleSet {
    let lists = sorted_neighbors(g, view);
    let mut removed = vec![false; g.m()];
    let mut marked_neg: FxHashSet<u64> = FxHashSet::default();
    let mut out = TriangleSet::new();

    for w in 0..g.n() as Vertex {
        let list = &lists[w as usize];
        for (i, a) in list.iter().enumerate() {
            for b in &list[i + 1..] {
                if removed[a.edge as usize] {
                    break;
                }
                if !view.within_budget(a.log_len, b.log_len) {
                    break;
                }
                if removed[b.edge as usize] || g.is_positive(a.v, b.v) {
                    continue;
                }
                let closing = pair_key(a.v, b.v);
                if marked_neg.contains(&closing) || view.marked.contains(&closing) {
                    continue;
                }
                let len = log_sum_exp3(a.log_len, b.log_len, view.lengths.negative_log(a.v, b.v));
                if len < view.limit_log {
                    removed[a.edge as usize] = true;
                    removed[b.edge as usize] = true;
                    marked_neg.insert(closing);
                    out.try_insert(OpenTriangle::new(a.v, w, b.v));
                }
            }
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::super::{enumerate_eligible, LengthTable};
    use super::*;

    #[test]
    fn star_takes_first_pair_of_spokes() {
        let g = star3();
        let unit = LengthTable::unit(&g);
        let view = LengthView::new(&unit, 4.0);
        let ts = greedy_maximal(&g, &view);
        assert_eq!(ts.triangles(), &[OpenTriangle::new(1, 0, 2)]);
        // Residual check: every eligible triangle touches a used pair.
        for t in enumerate_eligible(&g, &view).unwrap() {
            assert!(t.edge_keys().iter().any(|k| ts.used_edges().contains(k)));
        }
    }

    #[test]
    fn complete_positive_has_nothing() {
        let g = SignedGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let unit = LengthTable::unit(&g);
        assert!(greedy_maximal(&g, &LengthView::new(&unit, 10.0)).is_empty());
    }

    #[test]
    fn path_takes_its_triangle() {
        let g = path3();
        let unit = LengthTable::unit(&g);
        let ts = greedy_maximal(&g, &LengthView::new(&unit, 3.3));
        assert_eq!(ts.triangles(), &[OpenTriangle::new(0, 1, 2)]);
    }
}
