//! Per-triangle cost algebra of pivot rounding and clustering objectives.
//!
//! A triangle `(u, w, v)` has pairs `uw`, `wv`, `vu` with values `(a, b, c)`.
//! `ALG` sums, over the three choices of pivot, the expected disagreement the
//! opposite pair incurs; `LP` sums the matching share of the LP objective.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::GraphError;
use crate::graph::{Clustering, OpenTriangle, SignedGraph, Vertex};
use crate::hash::{hash_keys, unit_f64};
use crate::rounding::{attachment_prob, Assignment, Sign};

/// Signs of `(uw, wv, vu)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct TriangleType {
    pub signs: [Sign; 3],
}

impl TriangleType {
    pub const PPP: TriangleType = TriangleType { signs: [Sign::Pos, Sign::Pos, Sign::Pos] };
    /// Negative pair at `vu`.
    pub const PPN: TriangleType = TriangleType { signs: [Sign::Pos, Sign::Pos, Sign::Neg] };
    /// Positive pair at `uw`.
    pub const PNN: TriangleType = TriangleType { signs: [Sign::Pos, Sign::Neg, Sign::Neg] };
    pub const NNN: TriangleType = TriangleType { signs: [Sign::Neg, Sign::Neg, Sign::Neg] };

    pub const ALL: [TriangleType; 4] = [Self::PPP, Self::PPN, Self::PNN, Self::NNN];

    pub fn label(&self) -> String {
        self.signs.iter().map(|s| s.symbol()).collect()
    }
}

/// Values `x_uw = a`, `x_wv = b`, `x_vu = c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriangleLengths {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl TriangleLengths {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        for x in [a, b, c] {
            assert!((0.0..=1.0).contains(&x), "length {x} outside [0, 1]");
        }
        TriangleLengths { a, b, c }
    }
}

fn check_prob(p: f64) {
    assert!((0.0..=1.0).contains(&p), "probability {p} outside [0, 1]");
}

/// Probability that pivot `w` disagrees on pair `uv`, given the attachment
/// probabilities `p_uw`, `p_vw`.
pub fn cost_given_pivot(sign_uv: Sign, p_uw: f64, p_vw: f64) -> f64 {
    check_prob(p_uw);
    check_prob(p_vw);
    match sign_uv {
        Sign::Pos => p_uw + p_vw - 2.0 * p_uw * p_vw,
        Sign::Neg => (1.0 - p_uw) * (1.0 - p_vw),
    }
}

/// LP charge of pair `uv` when pivot `w` removes it.
pub fn lp_given_pivot(sign_uv: Sign, x_uv: f64, p_uw: f64, p_vw: f64) -> f64 {
    check_prob(x_uv);
    check_prob(p_uw);
    check_prob(p_vw);
    let decided = 1.0 - p_uw * p_vw;
    match sign_uv {
        Sign::Pos => x_uv * decided,
        Sign::Neg => (1.0 - x_uv) * decided,
    }
}

/// `(ALG, LP)` of one triangle.
pub fn alg_lp_triangle(ty: TriangleType, len: TriangleLengths) -> (f64, f64) {
    let [s_uw, s_wv, s_vu] = ty.signs;
    let (a, b, c) = (len.a, len.b, len.c);
    let (pa, pb, pc) = (attachment_prob(s_uw, a), attachment_prob(s_wv, b), attachment_prob(s_vu, c));
    // Pivot w decides vu, pivot v decides uw, pivot u decides wv.
    let alg = cost_given_pivot(s_vu, pa, pb) + cost_given_pivot(s_uw, pc, pb) + cost_given_pivot(s_wv, pc, pa);
    let lp = lp_given_pivot(s_vu, c, pa, pb) + lp_given_pivot(s_uw, a, pc, pb) + lp_given_pivot(s_wv, b, pc, pa);
    (alg, lp)
}

/// `ALG - 2.4 LP`.
pub fn c_function(ty: TriangleType, len: TriangleLengths) -> f64 {
    let (alg, lp) = alg_lp_triangle(ty, len);
    alg - 2.4 * lp
}

/// `ALG / LP`, with `0/0 = 0` and `x/0 = inf` for `x > 0`.
pub fn rho(ty: TriangleType, len: TriangleLengths) -> f64 {
    let (alg, lp) = alg_lp_triangle(ty, len);
    match (alg == 0.0, lp == 0.0) {
        (true, true) => 0.0,
        (false, true) => f64::INFINITY,
        _ => alg / lp,
    }
}

/// Positive edges cut plus negative pairs inside clusters.
pub fn disagreements(g: &SignedGraph, c: &Clustering) -> Result<u64, GraphError> {
    if c.len() != g.n() {
        return Err(GraphError::ClusteringSize { expected: g.n(), found: c.len() });
    }
    let mut sizes = vec![0u64; c.cluster_count()];
    for &l in c.labels() {
        sizes[l as usize] += 1;
    }
    let inside_pairs: u64 = sizes.iter().map(|&s| s * s.saturating_sub(1) / 2).sum();
    let inside_pos = g.edges().iter().filter(|&&(u, v)| c.label(u) == c.label(v)).count() as u64;
    Ok((g.m() as u64 - inside_pos) + (inside_pairs - inside_pos))
}

/// `sum over E+ of x + sum over E- of (1 - x)`.
pub fn lp_objective(a: &Assignment, _g: &SignedGraph) -> f64 {
    a.x_pos.iter().sum::<f64>() + a.stored_negatives().iter().map(|p| 1.0 - p.1).sum::<f64>()
}

/// Violations below this are treated as rounding noise.
pub const PARTIAL_TRIANGLE_TOLERANCE: f64 = 1e-12;
/// Above this many wedges the check samples instead of enumerating.
pub const EXHAUSTIVE_WEDGE_LIMIT: u64 = 10_000_000;
pub const SAMPLED_TRIANGLES: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PartialTriangleReport {
    pub ok: bool,
    pub exhaustive: bool,
    pub checked: u64,
    /// Largest `x_uv - x_uw - x_wv` with its triangle.
    pub worst: Option<(OpenTriangle, f64)>,
}

/// `x_uw + x_wv >= x_uv` on open triangles; exhaustive when the graph is
/// small enough, otherwise on [`SAMPLED_TRIANGLES`] random wedges.
pub fn check_partial_triangle(a: &Assignment, g: &SignedGraph) -> PartialTriangleReport {
    let wedges: u64 = (0..g.n() as Vertex).map(|w| (g.degree(w) as u64).pow(2)).sum();
    if wedges <= EXHAUSTIVE_WEDGE_LIMIT {
        check_exhaustive(a, g)
    } else {
        check_partial_triangle_sampled(a, g, SAMPLED_TRIANGLES, 0)
    }
}

fn violation(a: &Assignment, g: &SignedGraph, u: Vertex, w: Vertex, v: Vertex) -> f64 {
    a.negative(u, v) - a.value(g, u, w) - a.value(g, w, v)
}

fn record(worst: &mut Option<(OpenTriangle, f64)>, t: OpenTriangle, s: f64) {
    if worst.is_none_or(|(_, b)| s > b) {
        *worst = Some((t, s));
    }
}

fn check_exhaustive(a: &Assignment, g: &SignedGraph) -> PartialTriangleReport {
    let mut worst = None;
    let mut checked = 0u64;
    g.for_each_open_triangle(|u, w, v| {
        checked += 1;
        record(&mut worst, OpenTriangle::new(u, w, v), violation(a, g, u, w, v));
    });
    let ok = worst.is_none_or(|(_, s)| s <= PARTIAL_TRIANGLE_TOLERANCE);
    PartialTriangleReport { ok, exhaustive: true, checked, worst }
}

/// Samples a center by degree-weighted index and two of its neighbors.
pub fn check_partial_triangle_sampled(
    a: &Assignment,
    g: &SignedGraph,
    samples: usize,
    seed: u64,
) -> PartialTriangleReport {
    let mut worst = None;
    let mut checked = 0u64;
    let slots = g.slot_count() as u64;
    if slots > 0 {
        for i in 0..samples as u64 {
            let s = hash_keys(seed, &[i]) % slots;
            let (mut lo, mut hi) = (0usize, g.n());
            while lo < hi {
                let mid = (lo + hi) / 2;
                if g.slot_range(mid as Vertex).end <= s as usize {
                    lo = mid + 1;
                } else {
                    hi = mid;
                }
            }
            let w = lo as Vertex;
            let nb = g.neighbors(w);
            let j = (unit_f64(hash_keys(seed, &[i, 1])) * nb.len() as f64) as usize;
            let (u, v) = (g.slot_target(s as usize), nb[j.min(nb.len() - 1)]);
            if u != v && !g.is_positive(u, v) {
                checked += 1;
                record(&mut worst, OpenTriangle::new(u, w, v), violation(a, g, u, w, v));
            }
        }
    }
    let ok = worst.is_none_or(|(_, s)| s <= PARTIAL_TRIANGLE_TOLERANCE);
    PartialTriangleReport { ok, exhaustive: false, checked, worst }
}

/// Worst values over a `steps`-per-axis grid of `[0, 1]^3`.
#[derive(Debug, Clone, Serialize)]
pub struct GridCertificate {
    pub steps: usize,
    /// Max of `ALG - 2.4 LP` over `(++-)` with `a + b >= c`.
    pub ppn_max_c: f64,
    pub ppn_argmax: (f64, f64, f64),
    /// Max of `ALG - 2.4 LP` over `(+++)`.
    pub ppp_max_c: f64,
    /// Max of `ALG - 2 LP` over `(+--)`.
    pub pnn_max_excess: f64,
    /// Max of `ALG - LP` over `(---)`.
    pub nnn_max_excess: f64,
}

#[inline]
fn grid_point(i: usize, steps: usize) -> f64 {
    i as f64 / (steps - 1) as f64
}

/// Sweeps the grid for all four triangle types.
pub fn certify_grid(steps: usize) -> GridCertificate {
    assert!(steps >= 2);
    let sweep = |ty: TriangleType, factor: f64, restrict: bool| -> (f64, (f64, f64, f64)) {
        (0..steps)
            .into_par_iter()
            .map(|i| {
                let a = grid_point(i, steps);
                let mut best = (f64::NEG_INFINITY, (0.0, 0.0, 0.0));
                for j in 0..steps {
                    let b = grid_point(j, steps);
                    for k in 0..steps {
                        let c = grid_point(k, steps);
                        if restrict && a + b < c {
                            continue;
                        }
                        let (alg, lp) = alg_lp_triangle(ty, TriangleLengths { a, b, c });
                        let v = alg - factor * lp;
                        if v > best.0 {
                            best = (v, (a, b, c));
                        }
                    }
                }
                best
            })
            .reduce(|| (f64::NEG_INFINITY, (0.0, 0.0, 0.0)), |x, y| if y.0 > x.0 { y } else { x })
    };
    let (ppn_max_c, ppn_argmax) = sweep(TriangleType::PPN, 2.4, true);
    GridCertificate {
        steps,
        ppn_max_c,
        ppn_argmax,
        ppp_max_c: sweep(TriangleType::PPP, 2.4, false).0,
        pnn_max_excess: sweep(TriangleType::PNN, 2.0, false).0,
        nnn_max_excess: sweep(TriangleType::NNN, 1.0, false).0,
    }
}

/// `type,a,b,c,ALG,LP,C` rows over the grid, all four types.
pub fn grid_csv(steps: usize) -> String {
    assert!(steps >= 2);
    let mut out = String::from("type,a,b,c,ALG,LP,C\n");
    for ty in TriangleType::ALL {
        let label = ty.label();
        for i in 0..steps {
            for j in 0..steps {
                for k in 0..steps {
                    let len = TriangleLengths { a: grid_point(i, steps), b: grid_point(j, steps), c: grid_point(k, steps) };
                    let (alg, lp) = alg_lp_triangle(ty, len);
                    let _ = writeln!(out, "{label},{},{},{},{alg},{lp},{}", len.a, len.b, len.c, alg - 2.4 * lp);
                }
            }
        }
    }
    out
}
