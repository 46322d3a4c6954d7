use rayon::prelude::*;

use crate::graph::OpenTriangle;
use crate::hash::{domain, hash_keys};
use crate::par::PAR_CUTOFF;

/// Result of [`conflict_mis`].
#[derive(Debug, Clone, Default)]
pub struct MisOutcome {
    /// Selected triangles in canonical order.
    pub selected: Vec<OpenTriangle>,
    /// Number of local-minimum rounds.
    pub rounds: usize,
}

/// Priority of a triangle; the triangle itself breaks hash ties.
#[inline]
fn priority(seed: u64, t: &OpenTriangle) -> (u64, OpenTriangle) {
    let h = hash_keys(seed, &[domain::TRIANGLE_PRIORITY, t.u as u64, t.w as u64, t.v as u64]);
    (h, *t)
}

/// Greedy MIS of the implicit conflict graph on `candidates`, in which two
/// triangles conflict when they share a pair.
///
/// Each round computes, for every pair, the minimum priority among the live
/// triangles using it. Triangles that hold the minimum on all three pairs join
/// the output; they and everything sharing a pair with them leave the pool.
pub fn conflict_mis(candidates: &[OpenTriangle], seed: u64) -> MisOutcome {
    let mut live: Vec<(u64, OpenTriangle)> = candidates.iter().map(|t| priority(seed, t)).collect();
    live.sort_unstable_by_key(|&(_, t)| t);
    live.dedup_by_key(|&mut (_, t)| t);

    let mut out = MisOutcome::default();
    let mut slots: Vec<(u64, (u64, OpenTriangle))> = Vec::new();
    while !live.is_empty() {
        out.rounds += 1;
        slots.clear();
        slots.extend(live.iter().flat_map(|&p| p.1.edge_keys().map(|k| (k, p))));
        if slots.len() >= PAR_CUTOFF {
            slots.par_sort_unstable();
        } else {
            slots.sort_unstable();
        }
        // After sorting, the first slot of each pair-group carries its minimum.
        slots.dedup_by_key(|s| s.0);
        let local = |k: u64| slots[slots.binary_search_by_key(&k, |s| s.0).unwrap()].1;

        let winners: Vec<(u64, OpenTriangle)> = live
            .iter()
            .copied()
            .filter(|p| p.1.edge_keys().iter().all(|&k| local(k) == *p))
            .collect();
        let mut taken: Vec<u64> = winners.iter().flat_map(|p| p.1.edge_keys()).collect();
        taken.sort_unstable();
        live.retain(|p| p.1.edge_keys().iter().all(|k| taken.binary_search(k).is_err()));
        out.selected.extend(winners.into_iter().map(|p| p.1));
    }
    out.selected.sort_unstable();
    out
}
