//! Round-based maximal edge-disjoint eligible triangles with a doubling/reset
//! exploration schedule.
//!
//! Every directed positive edge ("arc") `(w, u)` owns the triangles `(u, w, v)`
//! whose edge `(w, v)` comes after `(w, u)` in the `(length, id)` order of `w`'s
//! neighbors. In a round with rate `r`, each active arc inspects the neighbors at
//! offsets `r ..= 2r - 1` past its own position in the snapshot list taken at
//! the last reset. Eligible triangles from all arcs go through one conflict-graph
//! MIS, winners are removed, and the rate doubles unless too few explored
//! triangles are still alive, in which case exploration restarts at rate 1.

use std::cmp::Ordering;
use std::fmt::Write as _;

use rustc_hash::FxHashSet;
use serde::Serialize;

use super::{conflict_mis, key_cmp, sorted_neighbors, LengthView, Neighbor, TriangleSet};
use crate::graph::{pair_key, EdgeId, OpenTriangle, SignedGraph, Vertex};
use crate::logspace::log_sum_exp3;
use crate::par;

/// One row of the optional per-round trace.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RoundTrace {
    pub round: usize,
    pub rate: f64,
    pub active: usize,
    pub alive_sum: u64,
    pub collected: usize,
    pub selected: usize,
    pub reset: bool,
}

/// Counters of one engine call.
#[derive(Debug, Clone, Default, Serialize)]
pub struct EngineStats {
    pub rounds: usize,
    pub resets: usize,
    pub doubles: usize,
    /// Longest run of consecutive doubling rounds.
    pub max_doubles_between_resets: usize,
    pub initial_active: usize,
    pub collected_total: usize,
    pub max_collected: usize,
    pub max_alive_sum: u64,
    pub mis_rounds_total: usize,
    pub mis_rounds_max: usize,
    /// Neighbor-list entries inspected plus per-arc bookkeeping.
    pub work: u64,
    #[serde(skip)]
    pub trace: Vec<RoundTrace>,
}

impl EngineStats {
    /// `round,r,active,alive_sum,collected,selected,reset` rows with a header.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("round,r,active,alive_sum,collected,selected,reset\n");
        for t in &self.trace {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                t.round, t.rate, t.active, t.alive_sum, t.collected, t.selected, t.reset
            );
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct ArcState {
    w: Vertex,
    u: Vertex,
    edge: EdgeId,
    log_len: f64,
    /// Position of `u` in the snapshot list of `w`.
    idx_static: usize,
    /// Key of the last inspected neighbor.
    cur: (f64, Vertex),
}

impl ArcState {
    #[inline]
    fn self_key(&self) -> (f64, Vertex) {
        (self.log_len, self.u)
    }
}

/// Maximal edge-disjoint set of eligible open triangles.
pub fn parallel_maximal(g: &SignedGraph, view: &LengthView, seed: u64) -> TriangleSet {
    parallel_maximal_with_stats(g, view, seed, false).0
}

/// As [`parallel_maximal`], also returning round counters and, if `trace` is
/// set, one [`RoundTrace`] per round.
pub fn parallel_maximal_with_stats(
    g: &SignedGraph,
    view: &LengthView,
    seed: u64,
    trace: bool,
) -> (TriangleSet, EngineStats) {
    let mut stats = EngineStats::default();
    let mut out = TriangleSet::new();

    let mut current = sorted_neighbors(g, view);
    let mut snapshot = current.clone();
    let mut removed = vec![false; g.m()];
    for (e, &(a, b)) in g.edges().iter().enumerate() {
        if view.marked.contains(&pair_key(a, b)) {
            removed[e] = true;
        }
    }
    let mut marked: FxHashSet<u64> = view.marked.clone();

    let mut active: Vec<ArcState> = Vec::with_capacity(g.slot_count());
    for (w, list) in snapshot.iter().enumerate() {
        for (idx, nb) in list.iter().enumerate() {
            let next_ok = list.get(idx + 1).is_some_and(|x| view.within_budget(nb.log_len, x.log_len));
            if next_ok {
                active.push(ArcState {
                    w: w as Vertex,
                    u: nb.v,
                    edge: nb.edge,
                    log_len: nb.log_len,
                    idx_static: idx,
                    cur: nb.key(),
                });
            }
        }
    }
    stats.initial_active = active.len();

    // Rate r is stored doubled so that the initial r = 1/2 stays integral.
    let mut rate_x2: u64 = 1;
    let mut doubles_run = 0usize;
    while !active.is_empty() {
        stats.rounds += 1;

        // Part 1: decide between doubling and resetting.
        let alive_sum = par::sum_u64(&active, |a| alive_count(&current[a.w as usize], a));
        #[cfg(debug_assertions)]
        for a in &active {
            debug_assert_eq!(
                alive_count(&current[a.w as usize], a),
                alive_recount(&snapshot[a.w as usize], &removed, a),
                "alive accounting drifted for arc ({}, {})",
                a.w,
                a.u
            );
        }
        stats.max_alive_sum = stats.max_alive_sum.max(alive_sum);
        let reset = 8 * alive_sum < active.len() as u64 * rate_x2;
        if reset {
            stats.resets += 1;
            doubles_run = 0;
            rate_x2 = 2;
            snapshot.clone_from(&current);
            par::for_each_mut(&mut active, |a| {
                let list = &snapshot[a.w as usize];
                a.idx_static = list.partition_point(|x| key_cmp(x.key(), a.self_key()) == Ordering::Less);
                debug_assert_eq!(list[a.idx_static].v, a.u);
                a.cur = a.self_key();
            });
        } else {
            stats.doubles += 1;
            doubles_run += 1;
            stats.max_doubles_between_resets = stats.max_doubles_between_resets.max(doubles_run);
            rate_x2 *= 2;
        }
        let r = (rate_x2 / 2) as usize;

        // Part 2: inspect each arc's window and collect eligible triangles.
        let mut collected = par::flat_map(&active, |a| {
            let list = &snapshot[a.w as usize];
            let lo = (a.idx_static + r).min(list.len());
            let hi = (a.idx_static + 2 * r).min(list.len());
            list[lo..hi].iter().filter_map(|nb| eligible(g, view, &removed, &marked, a, nb)).collect::<Vec<_>>()
        });
        stats.work += active.len() as u64;
        stats.work += active
            .iter()
            .map(|a| {
                let len = snapshot[a.w as usize].len();
                ((a.idx_static + 2 * r).min(len) - (a.idx_static + r).min(len)) as u64
            })
            .sum::<u64>();
        par::for_each_mut(&mut active, |a| {
            let list = &snapshot[a.w as usize];
            if a.idx_static + r < list.len() {
                let last = (a.idx_static + 2 * r - 1).min(list.len() - 1);
                a.cur = list[last].key();
            }
        });
        collected.sort_unstable();
        collected.dedup();
        stats.collected_total += collected.len();
        stats.max_collected = stats.max_collected.max(collected.len());

        // Part 3: conflict-graph MIS, then retire the winners' edges.
        let mis = conflict_mis(&collected, seed);
        stats.mis_rounds_total += mis.rounds;
        stats.mis_rounds_max = stats.mis_rounds_max.max(mis.rounds);
        let mut touched = Vec::with_capacity(3 * mis.selected.len());
        for t in &mis.selected {
            let e1 = g.edge_id(t.u, t.w).expect("positive edge");
            let e2 = g.edge_id(t.w, t.v).expect("positive edge");
            removed[e1 as usize] = true;
            removed[e2 as usize] = true;
            marked.insert(pair_key(t.u, t.v));
            touched.extend([t.u, t.w, t.v]);
            let fresh = out.try_insert(*t);
            debug_assert!(fresh, "MIS produced overlapping triangle {t:?}");
        }
        if trace {
            stats.trace.push(RoundTrace {
                round: stats.rounds - 1,
                rate: r as f64,
                active: active.len(),
                alive_sum,
                collected: collected.len(),
                selected: mis.selected.len(),
                reset,
            });
        }

        // Part 4: refresh neighbor lists and retire exhausted arcs.
        touched.sort_unstable();
        touched.dedup();
        for x in touched {
            current[x as usize].retain(|nb| !removed[nb.edge as usize]);
        }
        active.retain(|a| {
            !removed[a.edge as usize]
                && snapshot[a.w as usize]
                    .get(a.idx_static + 2 * r)
                    .is_some_and(|x| view.within_budget(a.log_len, x.log_len))
        });
    }
    out.sort();
    (out, stats)
}

/// Explored-but-unwanted triangles of an arc, from two binary searches in the
/// current neighbor list.
fn alive_count(list: &[Neighbor], a: &ArcState) -> u64 {
    let idx_self = list.partition_point(|x| key_cmp(x.key(), a.self_key()) == Ordering::Less);
    let upto = list.partition_point(|x| key_cmp(x.key(), a.cur) != Ordering::Greater);
    (upto - 1 - idx_self) as u64
}

/// From-scratch recount over the snapshot list, used to cross-check
/// [`alive_count`] in debug builds.
#[cfg(debug_assertions)]
fn alive_recount(snapshot: &[Neighbor], removed: &[bool], a: &ArcState) -> u64 {
    let upto = snapshot.partition_point(|x| key_cmp(x.key(), a.cur) != Ordering::Greater);
    snapshot[a.idx_static + 1..upto.max(a.idx_static + 1)]
        .iter()
        .filter(|nb| !removed[nb.edge as usize])
        .count() as u64
}

/// Re-validates a window entry at selection time; snapshot lists may contain
/// edges removed since the last reset.
#[inline]
fn eligible(
    g: &SignedGraph,
    view: &LengthView,
    removed: &[bool],
    marked: &FxHashSet<u64>,
    a: &ArcState,
    nb: &Neighbor,
) -> Option<OpenTriangle> {
    if removed[nb.edge as usize] || g.is_positive(a.u, nb.v) || marked.contains(&pair_key(a.u, nb.v)) {
        return None;
    }
    let len = log_sum_exp3(a.log_len, nb.log_len, view.lengths.negative_log(a.u, nb.v));
    (len < view.limit_log).then(|| OpenTriangle::new(a.u, a.w, nb.v))
}
