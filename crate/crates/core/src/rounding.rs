//! Pivot rounding of a fractional assignment.
//!
//! Each pair is attached with probability `1 - p`, where `p = f+(x)` for
//! positive edges and `p = f-(x)` for negative pairs. All coins are flipped up
//! front into a derived graph; plain pivot on that graph then yields the
//! clustering.

use serde::Serialize;

use crate::graph::{pair_key, unpack_pair, Clustering, SignedGraph, Vertex};
use crate::hash::{domain, hash_keys, unit_f64};
use crate::lp::FractionalSolution;
use crate::par;

/// Sign of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn symbol(self) -> char {
        match self {
            Sign::Pos => '+',
            Sign::Neg => '-',
        }
    }
}

fn check_unit(x: f64) {
    assert!((0.0..=1.0).contains(&x), "value {x} outside [0, 1]");
}

/// `1.2 x` below `5/6`, `1` from there on.
pub fn f_plus(x: f64) -> f64 {
    check_unit(x);
    if x >= 5.0 / 6.0 {
        1.0
    } else {
        (1.2 * x).min(1.0)
    }
}

pub fn f_minus(x: f64) -> f64 {
    check_unit(x);
    x
}

pub fn attachment_prob(sign: Sign, x: f64) -> f64 {
    match sign {
        Sign::Pos => f_plus(x),
        Sign::Neg => f_minus(x),
    }
}

/// Values `x_e` on all pairs. Negative pairs default to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub x_pos: Vec<f64>,
    /// Sorted by pair key; only values below 1.
    x_neg: Vec<(u64, f64)>,
}

impl Assignment {
    /// `x_pos` indexed by edge id; `x_neg` lists negative pairs with their value.
    pub fn new(g: &SignedGraph, x_pos: Vec<f64>, x_neg: impl IntoIterator<Item = ((Vertex, Vertex), f64)>) -> Self {
        assert_eq!(x_pos.len(), g.m(), "one value per positive edge");
        x_pos.iter().for_each(|&x| check_unit(x));
        let mut neg: Vec<(u64, f64)> = x_neg
            .into_iter()
            .map(|((u, v), x)| {
                check_unit(x);
                assert!(u != v && !g.is_positive(u, v), "pair {u} {v} is not negative");
                (pair_key(u, v), x)
            })
            .filter(|p| p.1 < 1.0)
            .collect();
        neg.sort_unstable_by_key(|p| p.0);
        neg.dedup_by_key(|p| p.0);
        Assignment { x_pos, x_neg: neg }
    }

    /// `x = 0` on positive edges, `x = 1` on negative pairs.
    pub fn integral_signs(g: &SignedGraph) -> Self {
        Assignment { x_pos: vec![0.0; g.m()], x_neg: Vec::new() }
    }

    /// `x = z` on positive edges, `x = 1 - z` on negative pairs.
    pub fn from_fractional(z: &FractionalSolution) -> Self {
        let x_neg = z.z_neg.iter().map(|&(k, z)| (k, 1.0 - z)).filter(|p| p.1 < 1.0).collect();
        Assignment { x_pos: z.z_pos.clone(), x_neg }
    }

    pub fn value(&self, g: &SignedGraph, u: Vertex, v: Vertex) -> f64 {
        match g.edge_id(u, v) {
            Some(e) => self.x_pos[e as usize],
            None => self.negative(u, v),
        }
    }

    pub fn negative(&self, u: Vertex, v: Vertex) -> f64 {
        let key = pair_key(u, v);
        self.x_neg.binary_search_by_key(&key, |p| p.0).map_or(1.0, |i| self.x_neg[i].1)
    }

    /// Negative pairs with a value below 1, as `(pair key, x)`.
    pub fn stored_negatives(&self) -> &[(u64, f64)] {
        &self.x_neg
    }
}

/// Pairs that survived pre-rounding, with adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedGraph {
    n: usize,
    kept: Vec<(Vertex, Vertex)>,
    offsets: Vec<usize>,
    adj: Vec<Vertex>,
}

impl DerivedGraph {
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (Vertex, Vertex)>) -> Self {
        let mut kept: Vec<(Vertex, Vertex)> = pairs.into_iter().map(|(u, v)| (u.min(v), u.max(v))).collect();
        kept.sort_unstable();
        kept.dedup();
        let mut deg = vec![0usize; n + 1];
        for &(u, v) in &kept {
            deg[u as usize + 1] += 1;
            deg[v as usize + 1] += 1;
        }
        for i in 0..n {
            deg[i + 1] += deg[i];
        }
        let offsets = deg;
        let mut fill = offsets.clone();
        let mut adj = vec![0; 2 * kept.len()];
        for &(u, v) in &kept {
            adj[fill[u as usize]] = v;
            fill[u as usize] += 1;
            adj[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        for w in 0..n {
            adj[offsets[w]..offsets[w + 1]].sort_unstable();
        }
        DerivedGraph { n, kept, offsets, adj }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kept(&self) -> &[(Vertex, Vertex)] {
        &self.kept
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }
}

/// Injective vertex priorities; lower goes first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PivotPriorities {
    keys: Vec<(u64, Vertex)>,
}

impl PivotPriorities {
    pub fn from_seed(n: usize, seed: u64) -> Self {
        let keys = (0..n as Vertex).map(|v| (hash_keys(seed, &[domain::VERTEX_PRIORITY, v as u64]), v)).collect();
        PivotPriorities { keys }
    }

    /// Priorities given by a permutation: `order[i]` gets rank `i`.
    pub fn from_order(order: &[Vertex]) -> Self {
        let mut keys = vec![(0u64, 0 as Vertex); order.len()];
        for (rank, &v) in order.iter().enumerate() {
            keys[v as usize] = (rank as u64, v);
        }
        PivotPriorities { keys }
    }

    #[inline]
    pub fn key(&self, v: Vertex) -> (u64, Vertex) {
        self.keys[v as usize]
    }

    /// Vertices by increasing priority.
    pub fn order(&self) -> Vec<Vertex> {
        let mut ks = self.keys.clone();
        ks.sort_unstable();
        ks.into_iter().map(|k| k.1).collect()
    }
}

/// Flips the coin of every pair with `p < 1`; returns the derived graph and
/// the number of coins flipped.
pub fn pre_round_counted(g: &SignedGraph, a: &Assignment, seed: u64) -> (DerivedGraph, usize) {
    let keep = |u: Vertex, v: Vertex, p: f64| -> Option<(Vertex, Vertex)> {
        let coin = unit_f64(hash_keys(seed, &[domain::EDGE_COIN, u.min(v) as u64, u.max(v) as u64]));
        (coin < 1.0 - p).then_some((u, v))
    };
    let mut draws = 0usize;
    let mut kept = Vec::new();
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        let p = f_plus(a.x_pos[e]);
        if p < 1.0 {
            draws += 1;
            kept.extend(keep(u, v, p));
        }
    }
    for &(key, x) in a.stored_negatives() {
        let p = f_minus(x);
        if p < 1.0 {
            let (u, v) = unpack_pair(key);
            draws += 1;
            kept.extend(keep(u, v, p));
        }
    }
    (DerivedGraph::from_pairs(g.n(), kept), draws)
}

pub fn pre_round(g: &SignedGraph, a: &Assignment, seed: u64) -> DerivedGraph {
    pre_round_counted(g, a, seed).0
}

/// Sequential pivot: the lowest-priority unclustered vertex takes all its
/// unclustered neighbors.
pub fn pivot_partition_seq(dg: &DerivedGraph, pr: &PivotPriorities) -> Clustering {
    const NONE: u32 = u32::MAX;
    let mut labels = vec![NONE; dg.n()];
    for w in pr.order() {
        if labels[w as usize] != NONE {
            continue;
        }
        labels[w as usize] = w;
        for &v in dg.neighbors(w) {
            if labels[v as usize] == NONE {
                labels[v as usize] = w;
            }
        }
    }
    Clustering::from_labels(labels)
}

/// One round of [`pivot_partition_par`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PivotRound {
    pub round: usize,
    pub pivots: usize,
    /// Vertices whose role (pivot or member) was settled in this round.
    pub clustered: usize,
}

/// Round-based pivot. Each round, every undecided vertex without an earlier
/// undecided neighbor becomes a pivot and its undecided neighbors become
/// members. Once no undecided vertex is left, every member joins its adjacent
/// pivot with the smallest priority, which reproduces the sequential process.
pub fn pivot_partition_par(dg: &DerivedGraph, pr: &PivotPriorities) -> (Clustering, Vec<PivotRound>) {
    #[derive(Clone, Copy, PartialEq, Eq)]
    enum Role {
        Undecided,
        Pivot,
        Member,
    }
    let n = dg.n();
    let mut role = vec![Role::Undecided; n];
    let mut pending: Vec<Vertex> = (0..n as Vertex).collect();
    let mut trace = Vec::new();
    while !pending.is_empty() {
        let minima: Vec<bool> = par::map(&pending, |&v| {
            dg.neighbors(v).iter().all(|&u| role[u as usize] != Role::Undecided || pr.key(u) > pr.key(v))
        });
        let mut pivots = 0;
        for (&v, &p) in pending.iter().zip(&minima) {
            if p {
                role[v as usize] = Role::Pivot;
                pivots += 1;
            }
        }
        let covered: Vec<bool> = par::map(&pending, |&v| {
            role[v as usize] == Role::Undecided && dg.neighbors(v).iter().any(|&u| role[u as usize] == Role::Pivot)
        });
        for (&v, &c) in pending.iter().zip(&covered) {
            if c {
                role[v as usize] = Role::Member;
            }
        }
        let before = pending.len();
        pending.retain(|&v| role[v as usize] == Role::Undecided);
        trace.push(PivotRound { round: trace.len(), pivots, clustered: before - pending.len() });
    }
    let vertices: Vec<Vertex> = (0..n as Vertex).collect();
    let labels = par::map(&vertices, |&v| match role[v as usize] {
        Role::Pivot => v,
        _ => *dg
            .neighbors(v)
            .iter()
            .filter(|&&u| role[u as usize] == Role::Pivot)
            .min_by_key(|&&u| pr.key(u))
            .expect("member has a pivot neighbor"),
    });
    (Clustering::from_labels(labels), trace)
}

/// Pre-rounds with `seed` and runs round-based pivot with priorities from `seed`.
pub fn round_assignment(g: &SignedGraph, a: &Assignment, seed: u64) -> Clustering {
    #[cfg(debug_assertions)]
    if g.n() <= 64 {
        let report = crate::analysis::check_partial_triangle(a, g);
        debug_assert!(report.ok, "partial triangle inequality violated: {:?}", report.worst);
    }
    let dg = pre_round(g, a, seed);
    pivot_partition_par(&dg, &PivotPriorities::from_seed(g.n(), seed)).0
}
