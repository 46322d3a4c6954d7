//! Brute-force ground truth for small instances.

use crate::error::{EnumerationGuard, OracleError};
use crate::graph::{pair_key, Clustering, SignedGraph, Vertex};
use crate::hash::{domain, hash_keys};
use crate::rounding::Assignment;
use crate::triangles::{enumerate_eligible, parallel_maximal, EdgeLengths, LengthView, TriangleSet};

/// Enumeration limits, checked before any work starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    /// Largest `n` for partition enumeration.
    pub max_n: usize,
    /// Largest `2^k * n!` for the exact rounding expectation.
    pub max_states: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { max_n: 12, max_states: 10_000_000 }
    }
}

/// Minimum number of disagreements over all partitions, with an optimal one.
///
/// Walks restricted-growth strings depth first. Placing vertex `i` into a
/// cluster costs its positive edges to earlier vertices outside that cluster
/// plus its negative pairs to earlier vertices inside it; branches that cannot
/// beat the incumbent are cut.
pub fn brute_force_opt(g: &SignedGraph, budget: &OracleBudget) -> Result<(u64, Clustering), OracleError> {
    let n = g.n();
    if n > budget.max_n || n > 64 {
        return Err(OracleError::Budget(format!("n = {n} exceeds partition budget {}", budget.max_n)));
    }
    if n == 0 {
        return Ok((0, Clustering::singletons(0)));
    }
    let mut earlier_pos = vec![0u64; n];
    for &(u, v) in g.edges() {
        earlier_pos[v as usize] |= 1 << u;
    }
    let mut search = Search {
        n,
        earlier_pos,
        masks: Vec::with_capacity(n),
        labels: vec![0; n],
        best_cost: g.m() as u64,
        best_labels: (0..n as u32).collect(),
    };
    search.dfs(0, 0);
    Ok((search.best_cost, Clustering::from_labels(search.best_labels)))
}

struct Search {
    n: usize,
    earlier_pos: Vec<u64>,
    masks: Vec<u64>,
    labels: Vec<u32>,
    best_cost: u64,
    best_labels: Vec<u32>,
}

impl Search {
    fn dfs(&mut self, i: usize, cost: u64) {
        if cost >= self.best_cost {
            return;
        }
        if i == self.n {
            self.best_cost = cost;
            self.best_labels.copy_from_slice(&self.labels);
            return;
        }
        let pos = self.earlier_pos[i];
        let all_pos = pos.count_ones() as u64;
        let open = self.masks.len();
        let bit = 1u64 << i;
        for c in 0..=open {
            let inc = if c < open {
                let m = self.masks[c];
                let inside_pos = (pos & m).count_ones() as u64;
                (all_pos - inside_pos) + (m.count_ones() as u64 - inside_pos)
            } else {
                all_pos
            };
            if c == open {
                self.masks.push(bit);
            } else {
                self.masks[c] |= bit;
            }
            self.labels[i] = c as u32;
            self.dfs(i + 1, cost + inc);
            if c == open {
                self.masks.pop();
            } else {
                self.masks[c] &= !bit;
            }
        }
    }
}

/// Exact expected disagreements of pivot rounding on `a`: every outcome of
/// the uncertain coins times every vertex order, each order equally likely.
pub fn exact_expected_cost(g: &SignedGraph, a: &Assignment, budget: &OracleBudget) -> Result<f64, OracleError> {
    let n = g.n();
    if n > 6 {
        return Err(OracleError::Budget(format!("n = {n} exceeds 6")));
    }
    let attach = |x: f64| if x >= 5.0 / 6.0 { 1.0 } else { (1.2 * x).min(1.0) };
    let mut sure: Vec<(usize, usize)> = Vec::new();
    let mut coins: Vec<(usize, usize, f64)> = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = match g.edge_id(u as Vertex, v as Vertex) {
                Some(e) => attach(a.x_pos[e as usize]),
                None => a.negative(u as Vertex, v as Vertex),
            };
            if p == 0.0 {
                sure.push((u, v));
            } else if p < 1.0 {
                coins.push((u, v, 1.0 - p));
            }
        }
    }
    if coins.len() > 12 {
        return Err(OracleError::Budget(format!("{} uncertain pairs exceed 12", coins.len())));
    }
    let orders = permutations(n);
    let states = (1u64 << coins.len()) * orders.len() as u64;
    if states > budget.max_states {
        return Err(OracleError::Budget(format!("{states} states exceed {}", budget.max_states)));
    }
    let mut positive = vec![vec![false; n]; n];
    for &(u, v) in g.edges() {
        positive[u as usize][v as usize] = true;
        positive[v as usize][u as usize] = true;
    }

    let mut expected = 0.0;
    for outcome in 0u32..(1u32 << coins.len()) {
        let mut weight = 1.0;
        let mut adj = vec![0u32; n];
        for &(u, v) in &sure {
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
        }
        for (i, &(u, v, keep)) in coins.iter().enumerate() {
            if outcome >> i & 1 == 1 {
                weight *= keep;
                adj[u] |= 1 << v;
                adj[v] |= 1 << u;
            } else {
                weight *= 1.0 - keep;
            }
        }
        if weight == 0.0 {
            continue;
        }
        let mut total = 0u64;
        for order in &orders {
            let mut cluster = vec![usize::MAX; n];
            for &w in order {
                if cluster[w] != usize::MAX {
                    continue;
                }
                cluster[w] = w;
                for (v, c) in cluster.iter_mut().enumerate() {
                    if adj[w] >> v & 1 == 1 && *c == usize::MAX {
                        *c = w;
                    }
                }
            }
            for u in 0..n {
                for v in u + 1..n {
                    total += ((cluster[u] == cluster[v]) != positive[u][v]) as u64;
                }
            }
        }
        expected += weight * total as f64 / orders.len() as f64;
    }
    Ok(expected)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // Next lexicographic permutation.
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// Edge-disjoint, every member eligible, and no eligible triangle avoids all
/// used pairs.
pub fn verify_maximal(g: &SignedGraph, view: &LengthView, ts: &TriangleSet) -> Result<bool, EnumerationGuard> {
    let eligible = enumerate_eligible(g, view)?;
    if !ts.is_edge_disjoint() || !ts.triangles().iter().all(|t| view.is_eligible(g, t)) {
        return Ok(false);
    }
    let used = ts.used_edges();
    Ok(eligible.iter().all(|t| t.edge_keys().iter().any(|k| used.contains(k))))
}

/// Repetitions giving failure probability at most `n^-2` when each one
/// succeeds with probability `3/8`.
pub fn reduction_repetitions(n: usize) -> usize {
    if n < 3 {
        return 0;
    }
    (4.26 * (n as f64).ln()).ceil() as usize + 1
}

struct ReductionLengths<'a> {
    h: &'a SignedGraph,
}

impl EdgeLengths for ReductionLengths<'_> {
    fn positive_log(&self, _e: u32) -> f64 {
        0.0
    }

    fn negative_log(&self, u: Vertex, v: Vertex) -> f64 {
        if self.h.is_positive(u, v) {
            0.0
        } else {
            5f64.ln()
        }
    }
}

/// Decides whether the plain graph `h` (its edge set) contains a triangle,
/// using only eligible-open-triangle queries.
///
/// Each repetition keeps every edge of `h` as a positive edge with
/// probability 1/2. Dropped edges become negative pairs of length 1 and
/// non-edges of `h` negative pairs of length 5; all positive edges have
/// length 1. With `L = 4` an open triangle is eligible exactly when its
/// closing pair is a dropped edge of `h`, i.e. when it is a triangle of `h`.
pub fn triangle_detect_reduction(h: &SignedGraph, seed: u64) -> bool {
    triangle_detect_reduction_reps(h, seed, reduction_repetitions(h.n()))
}

pub fn triangle_detect_reduction_reps(h: &SignedGraph, seed: u64, reps: usize) -> bool {
    let lengths = ReductionLengths { h };
    (0..reps as u64).any(|rep| {
        let kept = h
            .edges()
            .iter()
            .copied()
            .filter(|&(u, v)| hash_keys(seed, &[domain::REDUCTION, rep, pair_key(u, v)]) >> 63 == 0);
        let g = SignedGraph::from_edges(h.n(), kept).expect("subgraph of a valid graph");
        let view = LengthView::new(&lengths, 4.0);
        !parallel_maximal(&g, &view, hash_keys(seed, &[rep])).is_empty()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GeneratorKind, OpenTriangle};
    use crate::triangles::{greedy_maximal, LengthTable};

    #[test]
    fn opt_small_cases() {
        let b = OracleBudget::default();
        let k3 = SignedGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(brute_force_opt(&k3, &b).unwrap(), (0, Clustering::single_cluster(3)));
        let path = SignedGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(brute_force_opt(&path, &b).unwrap().0, 1);
        let (g, truth) = crate::graph::planted(8, 2, 0.0, 1).unwrap();
        assert_eq!(brute_force_opt(&g, &b).unwrap(), (0, truth));
        let big = SignedGraph::empty(13);
        assert!(brute_force_opt(&big, &b).is_err());
    }

    #[test]
    fn expectation_of_deterministic_rounding() {
        // All attachment probabilities in {0, 1}: the derived graph is fixed.
        let path = SignedGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let a = Assignment::new(&path, vec![0.0, 0.0], [((0, 2), 0.0)]);
        // Derived graph is a triangle: one cluster in every order, cost 1.
        let e = exact_expected_cost(&path, &a, &OracleBudget::default()).unwrap();
        assert!((e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expectation_budget() {
        let g = SignedGraph::empty(7);
        assert!(exact_expected_cost(&g, &Assignment::integral_signs(&g), &OracleBudget::default()).is_err());
        let g = SignedGraph::empty(6);
        let tight = OracleBudget { max_n: 12, max_states: 100 };
        assert!(exact_expected_cost(&g, &Assignment::integral_signs(&g), &tight).is_err());
    }

    #[test]
    fn maximality_checks() {
        let star = SignedGraph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let unit = LengthTable::unit(&star);
        let view = LengthView::new(&unit, 4.0);
        assert!(verify_maximal(&star, &view, &greedy_maximal(&star, &view)).unwrap());
        let overlap = TriangleSet::from_unchecked(vec![OpenTriangle::new(1, 0, 2), OpenTriangle::new(1, 0, 3)]);
        assert!(!verify_maximal(&star, &view, &overlap).unwrap());
        assert!(!verify_maximal(&star, &view, &TriangleSet::new()).unwrap());
        let matching = SignedGraph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let unit = LengthTable::unit(&matching);
        assert!(verify_maximal(&matching, &LengthView::new(&unit, 4.0), &TriangleSet::new()).unwrap());
    }

    #[test]
    fn reduction_small_cases() {
        let bip = SignedGraph::from_edges(6, (0..3).flat_map(|u| (3..6).map(move |v| (u, v)))).unwrap();
        let k4 = SignedGraph::from_edges(4, (0..4).flat_map(|u| (u + 1..4).map(move |v| (u, v)))).unwrap();
        for seed in 0..50 {
            assert!(!triangle_detect_reduction(&bip, seed));
            assert!(!triangle_detect_reduction(&SignedGraph::empty(10), seed));
        }
        let hits = (0..50).filter(|&s| triangle_detect_reduction(&k4, s)).count();
        assert_eq!(hits, 50);
        let g = generate(GeneratorKind::GnpSigned, 30, 0.2, 3).unwrap();
        assert!(reduction_repetitions(30) >= 15);
        let _ = triangle_detect_reduction(&g, 1);
    }
}
