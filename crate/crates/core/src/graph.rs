//! Signed graph model.
//!
//! Only the positive edge set is stored. Every unordered pair that is not a
//! positive edge is implicitly negative, so memory stays linear in `|E+|`.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::GraphError;

pub type Vertex = u32;
pub type EdgeId = u32;

/// Packs an unordered pair into a single key, smaller endpoint in the high half.
#[inline]
pub fn pair_key(u: Vertex, v: Vertex) -> u64 {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    ((a as u64) << 32) | b as u64
}

#[inline]
pub fn unpack_pair(key: u64) -> (Vertex, Vertex) {
    ((key >> 32) as Vertex, key as Vertex)
}

/// Complete signed graph given by its positive edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedGraph {
    n: usize,
    /// Positive edges as `(u, v)` with `u < v`, sorted lexicographically.
    edges: Vec<(Vertex, Vertex)>,
    offsets: Vec<usize>,
    neighbors: Vec<Vertex>,
    /// Edge id of each adjacency slot.
    slot_edges: Vec<EdgeId>,
}

impl SignedGraph {
    /// Builds a graph, rejecting self-loops, duplicates and out-of-range ids.
    /// Line numbers in errors are 1-based positions in `edges`.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut list = Vec::new();
        for (i, (u, v)) in edges.into_iter().enumerate() {
            let line = i + 1;
            for x in [u, v] {
                if x as usize >= n {
                    return Err(GraphError::VertexOutOfRange { line, vertex: x as u64, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop { line, vertex: u });
            }
            list.push((u.min(v), u.max(v), line));
        }
        list.sort_unstable();
        for w in list.windows(2) {
            if (w[0].0, w[0].1) == (w[1].0, w[1].1) {
                return Err(GraphError::DuplicateEdge { line: w[1].2.max(w[0].2), u: w[1].0, v: w[1].1 });
            }
        }
        Ok(Self::from_sorted_unique(n, list.into_iter().map(|(u, v, _)| (u, v)).collect()))
    }

    /// Internal constructor for an already canonical edge list.
    fn from_sorted_unique(n: usize, edges: Vec<(Vertex, Vertex)>) -> Self {
        let mut lists: Vec<Vec<(Vertex, EdgeId)>> = vec![Vec::new(); n];
        for (id, &(u, v)) in edges.iter().enumerate() {
            lists[u as usize].push((v, id as EdgeId));
            lists[v as usize].push((u, id as EdgeId));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::with_capacity(2 * edges.len());
        let mut slot_edges = Vec::with_capacity(2 * edges.len());
        offsets.push(0);
        for mut list in lists {
            list.sort_unstable();
            for (x, id) in list {
                neighbors.push(x);
                slot_edges.push(id);
            }
            offsets.push(neighbors.len());
        }
        SignedGraph { n, edges, offsets, neighbors, slot_edges }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_sorted_unique(n, Vec::new())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of positive edges.
    #[inline]
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Total number of unordered vertex pairs.
    pub fn pair_count(&self) -> u64 {
        let n = self.n as u64;
        n * n.saturating_sub(1) / 2
    }

    #[inline]
    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, id: EdgeId) -> (Vertex, Vertex) {
        self.edges[id as usize]
    }

    /// Positive neighbors of `w`, sorted by id.
    #[inline]
    pub fn neighbors(&self, w: Vertex) -> &[Vertex] {
        let w = w as usize;
        &self.neighbors[self.offsets[w]..self.offsets[w + 1]]
    }

    /// Edge ids aligned with [`Self::neighbors`].
    #[inline]
    pub fn neighbor_edges(&self, w: Vertex) -> &[EdgeId] {
        let w = w as usize;
        &self.slot_edges[self.offsets[w]..self.offsets[w + 1]]
    }

    /// First adjacency slot of `w`; arcs are identified by slot index.
    #[inline]
    pub fn slot_range(&self, w: Vertex) -> std::ops::Range<usize> {
        self.offsets[w as usize]..self.offsets[w as usize + 1]
    }

    #[inline]
    pub fn slot_count(&self) -> usize {
        self.neighbors.len()
    }

    #[inline]
    pub fn slot_target(&self, slot: usize) -> Vertex {
        self.neighbors[slot]
    }

    #[inline]
    pub fn slot_edge(&self, slot: usize) -> EdgeId {
        self.slot_edges[slot]
    }

    #[inline]
    pub fn degree(&self, w: Vertex) -> usize {
        self.offsets[w as usize + 1] - self.offsets[w as usize]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|w| self.degree(w as Vertex)).max().unwrap_or(0)
    }

    #[inline]
    pub fn is_positive(&self, u: Vertex, v: Vertex) -> bool {
        self.edge_id(u, v).is_some()
    }

    pub fn edge_id(&self, u: Vertex, v: Vertex) -> Option<EdgeId> {
        let (a, b) = if self.degree(u) <= self.degree(v) { (u, v) } else { (v, u) };
        let list = self.neighbors(a);
        list.binary_search(&b).ok().map(|k| self.neighbor_edges(a)[k])
    }

    /// True iff every pair is positive (vacuously true for n <= 1).
    pub fn is_complete_positive(&self) -> bool {
        self.m() as u64 == self.pair_count()
    }

    /// Parses the edge-list text format: header `n m`, then `m` lines `u v`.
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) =
            lines.next().ok_or(GraphError::Parse { line: 1, msg: "missing header".into() })?;
        let mut it = header.split_whitespace();
        let n = parse_field(it.next(), hline + 1, "n")? as usize;
        let m = parse_field(it.next(), hline + 1, "m")? as usize;
        if it.next().is_some() {
            return Err(GraphError::Parse { line: hline + 1, msg: "trailing tokens in header".into() });
        }
        let mut raw = Vec::with_capacity(m);
        let mut line_of = Vec::with_capacity(m);
        for (idx, l) in lines {
            let line = idx + 1;
            let mut it = l.split_whitespace();
            let u = parse_field(it.next(), line, "u")?;
            let v = parse_field(it.next(), line, "v")?;
            if it.next().is_some() {
                return Err(GraphError::Parse { line, msg: "expected exactly two vertex ids".into() });
            }
            for x in [u, v] {
                if x >= n as u64 {
                    return Err(GraphError::VertexOutOfRange { line, vertex: x, n });
                }
            }
            raw.push((u as Vertex, v as Vertex));
            line_of.push(line);
        }
        if raw.len() != m {
            return Err(GraphError::EdgeCount { expected: m, found: raw.len() });
        }
        // Re-map positional line numbers in errors back to file lines.
        Self::from_edges(n, raw).map_err(|e| match e {
            GraphError::SelfLoop { line, vertex } => GraphError::SelfLoop { line: line_of[line - 1], vertex },
            GraphError::DuplicateEdge { line, u, v } => {
                GraphError::DuplicateEdge { line: line_of[line - 1], u, v }
            }
            other => other,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        Self::parse_edge_list(&fs::read_to_string(path)?)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(16 * (self.m() + 1));
        let _ = writeln!(out, "{} {}", self.n, self.m());
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GraphError> {
        fs::write(path, self.to_edge_list())?;
        Ok(())
    }

    /// Connected components of `(V, E+)`; isolated vertices become singletons.
    /// Components are ordered by their smallest vertex.
    pub fn components(&self) -> Vec<Component> {
        let mut comp = vec![u32::MAX; self.n];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for s in 0..self.n {
            if comp[s] != u32::MAX {
                continue;
            }
            let cid = out.len() as u32;
            comp[s] = cid;
            queue.push_back(s as Vertex);
            let mut members = Vec::new();
            while let Some(w) = queue.pop_front() {
                members.push(w);
                for &x in self.neighbors(w) {
                    if comp[x as usize] == u32::MAX {
                        comp[x as usize] = cid;
                        queue.push_back(x);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        let mut local = vec![0 as Vertex; self.n];
        out.into_iter()
            .map(|vertices| {
                for (i, &v) in vertices.iter().enumerate() {
                    local[v as usize] = i as Vertex;
                }
                let mut edges = Vec::new();
                for &v in &vertices {
                    for &x in self.neighbors(v) {
                        if v < x {
                            edges.push((local[v as usize], local[x as usize]));
                        }
                    }
                }
                edges.sort_unstable();
                let graph = SignedGraph::from_sorted_unique(vertices.len(), edges);
                Component { graph, vertices }
            })
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().len() == 1
    }

    /// Calls `f(u, w, v)` for every open triangle with center `w` and `u < v`.
    pub fn for_each_open_triangle(&self, mut f: impl FnMut(Vertex, Vertex, Vertex)) {
        for w in 0..self.n as Vertex {
            let nb = self.neighbors(w);
            for (i, &u) in nb.iter().enumerate() {
                for &v in &nb[i + 1..] {
                    if !self.is_positive(u, v) {
                        f(u, w, v);
                    }
                }
            }
        }
    }

    pub fn open_triangle_count(&self) -> u64 {
        let mut c = 0;
        self.for_each_open_triangle(|_, _, _| c += 1);
        c
    }
}

fn parse_field(tok: Option<&str>, line: usize, what: &str) -> Result<u64, GraphError> {
    let tok = tok.ok_or_else(|| GraphError::Parse { line, msg: format!("missing {what}") })?;
    tok.parse::<u64>()
        .map_err(|_| GraphError::Parse { line, msg: format!("invalid {what}: {tok:?}") })
}

/// A connected component with the map from local ids back to the parent graph.
#[derive(Debug, Clone)]
pub struct Component {
    pub graph: SignedGraph,
    /// `vertices[local] = global`.
    pub vertices: Vec<Vertex>,
}

/// Open triangle `(u, w, v)`: `uw` and `wv` positive, `uv` negative, `w` the center.
/// Canonical form keeps `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpenTriangle {
    pub u: Vertex,
    pub w: Vertex,
    pub v: Vertex,
}

impl OpenTriangle {
    pub fn new(u: Vertex, w: Vertex, v: Vertex) -> Self {
        OpenTriangle { u: u.min(v), w, v: u.max(v) }
    }

    /// Pair keys of `(u,w)`, `(w,v)` and the closing pair `(u,v)`.
    #[inline]
    pub fn edge_keys(&self) -> [u64; 3] {
        [pair_key(self.u, self.w), pair_key(self.w, self.v), pair_key(self.u, self.v)]
    }

    /// Is this an open triangle of `g`?
    pub fn is_open_in(&self, g: &SignedGraph) -> bool {
        self.u != self.v
            && self.u != self.w
            && self.v != self.w
            && g.is_positive(self.u, self.w)
            && g.is_positive(self.w, self.v)
            && !g.is_positive(self.u, self.v)
    }
}

/// A partition of the vertex set as a vertex -> cluster id map.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clustering {
    labels: Vec<u32>,
}

impl Clustering {
    /// Normalizes ids to `0..k` in order of first appearance.
    pub fn from_labels(labels: Vec<u32>) -> Self {
        let mut c = Clustering { labels };
        c.normalize();
        c
    }

    pub fn singletons(n: usize) -> Self {
        Clustering { labels: (0..n as u32).collect() }
    }

    pub fn single_cluster(n: usize) -> Self {
        Clustering { labels: vec![0; n] }
    }

    fn normalize(&mut self) {
        let mut remap = rustc_hash::FxHashMap::default();
        for l in &mut self.labels {
            let next = remap.len() as u32;
            *l = *remap.entry(*l).or_insert(next);
        }
    }

    #[inline]
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, v: Vertex) -> u32 {
        self.labels[v as usize]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn cluster_count(&self) -> usize {
        self.labels.iter().max().map_or(0, |&m| m as usize + 1)
    }

    pub fn clusters(&self) -> Vec<Vec<Vertex>> {
        let mut out = vec![Vec::new(); self.cluster_count()];
        for (v, &l) in self.labels.iter().enumerate() {
            out[l as usize].push(v as Vertex);
        }
        out
    }

    /// Merges per-component clusterings back into one over the parent graph.
    /// Component cluster ids are offset in component order before normalization.
    pub fn merge(n: usize, parts: &[(&Component, &Clustering)]) -> Self {
        let mut labels = vec![0u32; n];
        let mut offset = 0u32;
        for (comp, c) in parts {
            for (local, &global) in comp.vertices.iter().enumerate() {
                labels[global as usize] = offset + c.labels[local];
            }
            offset += c.cluster_count() as u32;
        }
        Clustering::from_labels(labels)
    }

    /// One line per vertex: `v cluster_id`, sorted by `v`.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.labels.len() * 8);
        for (v, l) in self.labels.iter().enumerate() {
            let _ = writeln!(out, "{v} {l}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut labels = Vec::new();
        for (idx, l) in text.lines().enumerate() {
            if l.trim().is_empty() {
                continue;
            }
            let line = idx + 1;
            let mut it = l.split_whitespace();
            let v = parse_field(it.next(), line, "vertex")?;
            let c = parse_field(it.next(), line, "cluster id")?;
            if v != labels.len() as u64 {
                return Err(GraphError::Parse { line, msg: format!("expected vertex {}", labels.len()) });
            }
            labels.push(c as u32);
        }
        Ok(Clustering::from_labels(labels))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        Self::parse(&fs::read_to_string(path)?)
    }
}

/// Instance families for tests and benchmarks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorKind {
    /// `clusters` ground-truth blocks; each pair's sign is flipped with probability `param`.
    Planted { clusters: usize },
    /// Each pair positive independently with probability `param`.
    GnpSigned,
}

/// Deterministic instance generator; a pure function of its arguments.
pub fn generate(kind: GeneratorKind, n: usize, param: f64, seed: u64) -> Result<SignedGraph, GraphError> {
    match kind {
        GeneratorKind::Planted { clusters } => planted(n, clusters, param, seed).map(|(g, _)| g),
        GeneratorKind::GnpSigned => {
            check_param(n, param)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut edges = Vec::new();
            for u in 0..n as Vertex {
                for v in u + 1..n as Vertex {
                    if rng.gen::<f64>() < param {
                        edges.push((u, v));
                    }
                }
            }
            Ok(SignedGraph::from_sorted_unique(n, edges))
        }
    }
}

/// Planted partition: vertex `v` belongs to block `v * clusters / n`.
/// Returns the graph together with the ground-truth clustering.
pub fn planted(
    n: usize,
    clusters: usize,
    noise: f64,
    seed: u64,
) -> Result<(SignedGraph, Clustering), GraphError> {
    check_param(n, noise)?;
    if clusters == 0 || clusters > n {
        return Err(GraphError::InvalidParam(format!("clusters = {clusters} with n = {n}")));
    }
    let block = |v: usize| (v * clusters / n) as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let same = block(u) == block(v);
            let flip = rng.gen::<f64>() < noise;
            if same != flip {
                edges.push((u as Vertex, v as Vertex));
            }
        }
    }
    let truth = Clustering::from_labels((0..n).map(block).collect());
    Ok((SignedGraph::from_sorted_unique(n, edges), truth))
}

fn check_param(n: usize, p: f64) -> Result<(), GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidParam("n must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::InvalidParam(format!("probability {p} not in [0, 1]")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> SignedGraph {
        SignedGraph::parse_edge_list("3 2\n0 1\n1 2\n").unwrap()
    }

    #[test]
    fn parses_smallest_open_triangle() {
        let g = path3();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert!(!g.is_positive(0, 2));
        assert_eq!(g.open_triangle_count(), 1);
    }

    #[test]
    fn parses_single_vertex_and_triangle() {
        let g = SignedGraph::parse_edge_list("1 0").unwrap();
        assert_eq!((g.n(), g.m()), (1, 0));
        assert!(g.is_complete_positive());
        let k3 = SignedGraph::parse_edge_list("3 3\n0 1\n1 2\n0 2").unwrap();
        assert!(k3.is_complete_positive());
        assert!(!path3().is_complete_positive());
    }

    #[test]
    fn rejects_bad_input_with_line_numbers() {
        match SignedGraph::parse_edge_list("3 2\n0 1\n1 0\n") {
            Err(GraphError::DuplicateEdge { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match SignedGraph::parse_edge_list("3 1\n2 2\n") {
            Err(GraphError::SelfLoop { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            SignedGraph::parse_edge_list("3 1\n0 3\n"),
            Err(GraphError::VertexOutOfRange { line: 2, vertex: 3, .. })
        ));
        assert!(matches!(SignedGraph::parse_edge_list("3 1\n0 x\n"), Err(GraphError::Parse { line: 2, .. })));
        assert!(matches!(SignedGraph::parse_edge_list("3 2\n0 1\n"), Err(GraphError::EdgeCount { .. })));
    }

    #[test]
    fn adjacency_is_sorted_and_symmetric() {
        let g = SignedGraph::from_edges(5, [(4, 0), (2, 0), (3, 1), (0, 1), (2, 4)]).unwrap();
        for w in 0..5 {
            let nb = g.neighbors(w);
            assert!(nb.windows(2).all(|p| p[0] < p[1]));
            for (&x, &e) in nb.iter().zip(g.neighbor_edges(w)) {
                assert!(g.neighbors(x).contains(&w));
                let (a, b) = g.edge(e);
                assert_eq!(pair_key(a, b), pair_key(w, x));
            }
        }
    }

    #[test]
    fn components_split_and_remap() {
        let g = SignedGraph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let comps = g.components();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[1].vertices, vec![2, 3]);
        assert_eq!(comps[1].graph.edges(), &[(0, 1)]);

        let g = path3();
        let comps = g.components();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].graph, g);

        let comps = SignedGraph::empty(4).components();
        assert_eq!(comps.len(), 4);
        assert!(comps.iter().all(|c| c.graph.n() == 1));
    }

    #[test]
    fn generators() {
        let (g, truth) = planted(6, 2, 0.0, 1).unwrap();
        assert_eq!(g.m(), 6);
        assert_eq!(truth.cluster_count(), 2);
        let k5 = generate(GeneratorKind::GnpSigned, 5, 1.0, 3).unwrap();
        assert!(k5.is_complete_positive());
        assert!(generate(GeneratorKind::GnpSigned, 5, 1.5, 3).is_err());
        assert_eq!(
            generate(GeneratorKind::Planted { clusters: 3 }, 20, 0.2, 9).unwrap(),
            generate(GeneratorKind::Planted { clusters: 3 }, 20, 0.2, 9).unwrap()
        );
    }

    #[test]
    fn clustering_text_roundtrip() {
        let c = Clustering::from_labels(vec![5, 5, 2, 9, 2]);
        assert_eq!(c.labels(), &[0, 0, 1, 2, 1]);
        assert_eq!(Clustering::parse(&c.to_text()).unwrap(), c);
    }

    proptest::proptest! {
        #[test]
        fn edge_list_roundtrip(n in 1usize..30, seed in 0u64..1000, p in 0.0f64..1.0) {
            let g = generate(GeneratorKind::GnpSigned, n, p, seed).unwrap();
            let back = SignedGraph::parse_edge_list(&g.to_edge_list()).unwrap();
            proptest::prop_assert_eq!(&back, &g);
            let comps = g.components();
            let total: usize = comps.iter().map(|c| c.graph.m()).sum();
            proptest::prop_assert_eq!(total, g.m());
            for c in &comps {
                for &(a, b) in c.graph.edges() {
                    proptest::prop_assert!(g.is_positive(c.vertices[a as usize], c.vertices[b as usize]));
                }
            }
        }
    }
}
