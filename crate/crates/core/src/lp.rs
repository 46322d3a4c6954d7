//! Steepest-descent solver for the two-hop covering LP over open triangles.
//!
//! Lengths are kept as integer increment counts `k_e`: the length of a pair is
//! `exp(k_e * eps)` and its congestion `k_e * eps^2 / ln m`. The potential is
//! the sum of lengths over all `n(n-1)/2` pairs, tracked in log-space.

use std::fmt::Write as _;
use std::time::Instant;

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{GraphError, SolverError};
use crate::graph::{pair_key, unpack_pair, OpenTriangle, SignedGraph, Vertex};
use crate::hash::{domain, hash_keys};
use crate::logspace::{log_add_exp, log_sum_exp3, LogSumExp};
use crate::triangles::{greedy_maximal, parallel_maximal_with_stats, EdgeLengths, LengthView};

/// Iterations between full recomputations of the potential.
pub const PHI_RECOMPUTE_PERIOD: u64 = 1000;
/// Relative drift tolerated between the incremental and recomputed potential.
pub const PHI_DRIFT_TOLERANCE: f64 = 1e-9;

/// Which maximal-triangle routine runs inside each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum EngineKind {
    #[default]
    Parallel,
    Greedy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub epsilon: f64,
    /// `None` uses [`SolverConfig::default_guard`].
    pub max_iterations_guard: Option<u64>,
    pub seed: u64,
    pub engine: EngineKind,
    /// When the potential never reaches `m^3 / eps`, pick the best iteration
    /// over the whole run instead of failing.
    pub allow_unguarded_fallback: bool,
    pub record_history: bool,
}

impl SolverConfig {
    pub fn new(epsilon: f64) -> Self {
        SolverConfig {
            epsilon,
            max_iterations_guard: None,
            seed: 0,
            engine: EngineKind::Parallel,
            allow_unguarded_fallback: false,
            record_history: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Admissible `[lo, hi]` for `m` positive edges. The lower end `2/m` is
    /// capped at `1/10` so that small instances keep `eps = 1/10` available.
    pub fn epsilon_range(m: usize) -> (f64, f64) {
        let hi = 0.1;
        ((2.0 / m as f64).min(hi), hi)
    }

    /// `200 * eps^-4 * (ln m)^2`.
    pub fn iteration_bound(epsilon: f64, m: usize) -> f64 {
        let lm = (m as f64).ln();
        200.0 * epsilon.powi(-4) * lm * lm
    }

    pub fn default_guard(epsilon: f64, m: usize) -> u64 {
        (10.0 * Self::iteration_bound(epsilon, m)).ceil() as u64
    }

    pub fn validate(&self, m: usize) -> Result<(), SolverError> {
        let (lo, hi) = Self::epsilon_range(m);
        if !(self.epsilon.is_finite() && self.epsilon >= lo && self.epsilon <= hi) {
            return Err(SolverError::EpsilonOutOfRange { epsilon: self.epsilon, lo, hi, m });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Snapshot {
    iteration: u64,
    score_log: f64,
    alpha_steps: u64,
    k_pos: Vec<u32>,
    k_neg: FxHashMap<u64, u32>,
}

/// Mutable solver state between iterations.
#[derive(Debug, Clone)]
pub struct SolverState {
    epsilon: f64,
    ln_m: f64,
    pair_count: f64,
    k_pos: Vec<u32>,
    k_neg: FxHashMap<u64, u32>,
    alpha_steps: u64,
    iter: u64,
    log_phi: f64,
    selections: u64,
    t_min: Option<u64>,
    best: Option<Snapshot>,
    best_any: Option<Snapshot>,
    track_any: bool,
}

impl SolverState {
    /// Fresh state: every length 1, `alpha = 3`.
    pub fn new(g: &SignedGraph, epsilon: f64) -> Self {
        let pair_count = g.pair_count() as f64;
        let mut s = SolverState {
            epsilon,
            ln_m: (g.m() as f64).ln(),
            pair_count,
            k_pos: vec![0; g.m()],
            k_neg: FxHashMap::default(),
            alpha_steps: 0,
            iter: 0,
            log_phi: pair_count.ln(),
            selections: 0,
            t_min: None,
            best: None,
            best_any: None,
            track_any: false,
        };
        s.observe();
        s
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn iteration(&self) -> u64 {
        self.iter
    }

    pub fn alpha_steps(&self) -> u64 {
        self.alpha_steps
    }

    /// `ln alpha = ln 3 + a * ln(1 + eps)`.
    pub fn log_alpha(&self) -> f64 {
        3f64.ln() + self.alpha_steps as f64 * self.epsilon.ln_1p()
    }

    /// `ln((1 + eps) * alpha)`, the eligibility limit.
    pub fn limit_log(&self) -> f64 {
        self.log_alpha() + self.epsilon.ln_1p()
    }

    pub fn log_phi(&self) -> f64 {
        self.log_phi
    }

    /// First iteration whose potential reached `m^3 / eps`.
    pub fn t_min(&self) -> Option<u64> {
        self.t_min
    }

    /// Total number of triangle selections so far.
    pub fn selections(&self) -> u64 {
        self.selections
    }

    pub fn k_positive(&self, e: u32) -> u32 {
        self.k_pos[e as usize]
    }

    pub fn k_negative(&self, u: Vertex, v: Vertex) -> u32 {
        self.k_neg.get(&pair_key(u, v)).copied().unwrap_or(0)
    }

    /// Negative pairs that have received flow.
    pub fn negative_touched(&self) -> usize {
        self.k_neg.len()
    }

    pub fn max_increment(&self) -> u32 {
        self.k_pos.iter().chain(self.k_neg.values()).copied().max().unwrap_or(0)
    }

    /// Largest per-pair congestion `k * eps^2 / ln m`.
    pub fn max_congestion(&self) -> f64 {
        congestion(self.max_increment(), self.epsilon, self.ln_m)
    }

    pub fn dual_objective(&self) -> f64 {
        dual_value(self.selections, self.epsilon, self.ln_m)
    }

    /// Log-length of any pair.
    pub fn pair_log(&self, g: &SignedGraph, u: Vertex, v: Vertex) -> f64 {
        match g.edge_id(u, v) {
            Some(e) => self.positive_log(e),
            None => self.negative_log(u, v),
        }
    }

    pub fn triangle_log_len(&self, g: &SignedGraph, t: &OpenTriangle) -> f64 {
        log_sum_exp3(self.pair_log(g, t.u, t.w), self.pair_log(g, t.w, t.v), self.negative_log(t.u, t.v))
    }

    pub fn is_terminated(&self) -> bool {
        self.log_phi >= self.ln_m / self.epsilon - self.epsilon
    }

    /// Potential from scratch.
    pub fn recompute_log_phi(&self) -> f64 {
        let mut acc = LogSumExp::default();
        let mut touched = 0u64;
        for &k in self.k_pos.iter().chain(self.k_neg.values()) {
            if k > 0 {
                acc.push(k as f64 * self.epsilon);
                touched += 1;
            }
        }
        acc.push_weighted(0.0, self.pair_count - touched as f64);
        acc.value()
    }

    fn bump(&mut self, k: u32) {
        self.log_phi = log_add_exp(self.log_phi, k as f64 * self.epsilon + self.epsilon.exp_m1().ln());
    }

    fn snapshot(&self, score_log: f64) -> Snapshot {
        Snapshot {
            iteration: self.iter,
            score_log,
            alpha_steps: self.alpha_steps,
            k_pos: self.k_pos.clone(),
            k_neg: self.k_neg.clone(),
        }
    }

    /// Threshold bookkeeping and best-iteration tracking for the current state.
    fn observe(&mut self) {
        let score = self.log_phi - self.log_alpha();
        if self.t_min.is_none() && self.log_phi >= 3.0 * self.ln_m - self.epsilon.ln() {
            self.t_min = Some(self.iter);
        }
        if self.t_min.is_some() && self.best.as_ref().is_none_or(|b| score < b.score_log) {
            self.best = Some(self.snapshot(score));
        }
        if self.track_any && self.best_any.as_ref().is_none_or(|b| score < b.score_log) {
            self.best_any = Some(self.snapshot(score));
        }
    }
}

impl EdgeLengths for SolverState {
    #[inline]
    fn positive_log(&self, e: u32) -> f64 {
        self.k_pos[e as usize] as f64 * self.epsilon
    }

    #[inline]
    fn negative_log(&self, u: Vertex, v: Vertex) -> f64 {
        self.k_negative(u, v) as f64 * self.epsilon
    }
}

#[inline]
fn congestion(k: u32, epsilon: f64, ln_m: f64) -> f64 {
    k as f64 * epsilon * epsilon / ln_m
}

#[inline]
fn dual_value(selections: u64, epsilon: f64, ln_m: f64) -> f64 {
    selections as f64 * epsilon * epsilon / ln_m
}

/// What one iteration did.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: u64,
    pub log_phi_before: f64,
    pub log_phi_after: f64,
    pub log_alpha_before: f64,
    /// `|S|`; zero means alpha grew.
    pub selected: usize,
    pub engine_rounds: usize,
    pub engine_resets: usize,
}

/// One iteration: send flow on a maximal edge-disjoint set of eligible
/// triangles, or raise alpha when there is none.
pub fn run_iteration(state: &mut SolverState, g: &SignedGraph, seed: u64, engine: EngineKind) -> IterationRecord {
    let log_phi_before = state.log_phi;
    let log_alpha_before = state.log_alpha();
    let view = LengthView::with_log_limit(state, state.limit_log());
    let iter_seed = hash_keys(seed, &[domain::SOLVER_ITERATION, state.iter]);
    let (set, rounds, resets) = match engine {
        EngineKind::Parallel => {
            let (set, st) = parallel_maximal_with_stats(g, &view, iter_seed, false);
            (set, st.rounds, st.resets)
        }
        EngineKind::Greedy => (greedy_maximal(g, &view), 0, 0),
    };
    drop(view);

    if set.is_empty() {
        state.alpha_steps += 1;
    } else {
        for t in set.triangles() {
            for (a, b) in [(t.u, t.w), (t.w, t.v)] {
                let e = g.edge_id(a, b).expect("positive edge") as usize;
                let k = state.k_pos[e];
                state.bump(k);
                state.k_pos[e] = k + 1;
            }
            let slot = state.k_neg.entry(pair_key(t.u, t.v)).or_insert(0);
            let k = *slot;
            *slot += 1;
            state.bump(k);
        }
        state.selections += set.len() as u64;
    }
    state.iter += 1;
    state.observe();
    IterationRecord {
        iteration: state.iter - 1,
        log_phi_before,
        log_phi_after: state.log_phi,
        log_alpha_before,
        selected: set.len(),
        engine_rounds: rounds,
        engine_resets: resets,
    }
}

/// Fractional covering solution. Positive edges are indexed by edge id;
/// negative pairs are stored sparsely, absent pairs have value 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution {
    pub z_pos: Vec<f64>,
    /// Sorted by pair key.
    pub z_neg: Vec<(u64, f64)>,
    pub objective: f64,
    pub support_size: usize,
}

impl FractionalSolution {
    fn from_parts(z_pos: Vec<f64>, mut z_neg: Vec<(u64, f64)>) -> Self {
        z_neg.sort_unstable_by_key(|p| p.0);
        z_neg.retain(|p| p.1 != 0.0);
        let objective = z_pos.iter().sum::<f64>() + z_neg.iter().map(|p| p.1).sum::<f64>();
        let support_size = z_pos.iter().filter(|&&z| z != 0.0).count() + z_neg.len();
        FractionalSolution { z_pos, z_neg, objective, support_size }
    }

    pub fn value(&self, g: &SignedGraph, u: Vertex, v: Vertex) -> f64 {
        match g.edge_id(u, v) {
            Some(e) => self.z_pos[e as usize],
            None => self.negative(u, v),
        }
    }

    pub fn negative(&self, u: Vertex, v: Vertex) -> f64 {
        let key = pair_key(u, v);
        self.z_neg.binary_search_by_key(&key, |p| p.0).map_or(0.0, |i| self.z_neg[i].1)
    }

    /// Smallest `z_uv + z_uw + z_wv - 1` over all open triangles, with the
    /// triangle attaining it. `None` when there is no open triangle.
    pub fn worst_constraint(&self, g: &SignedGraph) -> Option<(OpenTriangle, f64)> {
        let mut worst: Option<(OpenTriangle, f64)> = None;
        g.for_each_open_triangle(|u, w, v| {
            let s = self.value(g, u, w) + self.value(g, w, v) + self.negative(u, v) - 1.0;
            if worst.is_none_or(|(_, best)| s < best) {
                worst = Some((OpenTriangle::new(u, w, v), s));
            }
        });
        worst
    }

    /// `u v sign z` lines for every nonzero value, positives first.
    pub fn to_text(&self, g: &SignedGraph) -> String {
        let mut out = String::new();
        for (e, &z) in self.z_pos.iter().enumerate() {
            if z != 0.0 {
                let (u, v) = g.edge(e as u32);
                let _ = writeln!(out, "{u} {v} + {z}");
            }
        }
        for &(key, z) in &self.z_neg {
            let (u, v) = unpack_pair(key);
            let _ = writeln!(out, "{u} {v} - {z}");
        }
        out
    }

    /// Reads [`FractionalSolution::to_text`] output; `−` is accepted as a sign.
    pub fn parse(text: &str, g: &SignedGraph) -> Result<Self, GraphError> {
        let mut z_pos = vec![0.0; g.m()];
        let mut z_neg = Vec::new();
        for (idx, l) in text.lines().enumerate() {
            let line = idx + 1;
            let fields: Vec<&str> = l.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let err = |msg: String| GraphError::Parse { line, msg };
            if fields.len() != 4 {
                return Err(err(format!("expected `u v sign z`, got {l:?}")));
            }
            let u: Vertex = fields[0].parse().map_err(|_| err(format!("invalid vertex {:?}", fields[0])))?;
            let v: Vertex = fields[1].parse().map_err(|_| err(format!("invalid vertex {:?}", fields[1])))?;
            let z: f64 = fields[3].parse().map_err(|_| err(format!("invalid value {:?}", fields[3])))?;
            if u as usize >= g.n() || v as usize >= g.n() || u == v {
                return Err(err(format!("invalid pair {u} {v}")));
            }
            if !(0.0..=1.0).contains(&z) {
                return Err(err(format!("value {z} outside [0, 1]")));
            }
            match (fields[2], g.edge_id(u, v)) {
                ("+", Some(e)) => z_pos[e as usize] = z,
                ("-" | "−", None) => z_neg.push((pair_key(u, v), z)),
                (s, _) => return Err(err(format!("sign {s:?} does not match pair {u} {v}"))),
            }
        }
        Ok(Self::from_parts(z_pos, z_neg))
    }
}

/// Frozen final congestion and the dual objective it certifies.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate {
    pub objective: f64,
    pub k_pos: Vec<u32>,
    /// Sorted by pair key.
    pub k_neg: Vec<(u64, u32)>,
    pub epsilon: f64,
    pub ln_m: f64,
}

impl DualCertificate {
    pub fn max_congestion(&self) -> f64 {
        let k = self.k_pos.iter().copied().chain(self.k_neg.iter().map(|p| p.1)).max().unwrap_or(0);
        congestion(k, self.epsilon, self.ln_m)
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SolverStats {
    pub iterations: u64,
    pub resets: u64,
    pub alpha_final_log: f64,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub support_size: usize,
    pub wall_time_ms: f64,
    pub alpha_steps: u64,
    pub flow_steps: u64,
    pub engine_rounds: u64,
    pub selections: u64,
    pub t_min: Option<u64>,
    pub snapshot_iteration: u64,
    pub snapshot_alpha_log: f64,
    pub max_congestion: f64,
    pub used_fallback: bool,
    /// Largest relative gap seen between incremental and recomputed potential.
    pub phi_max_drift: f64,
    #[serde(skip)]
    pub history: Vec<IterationRecord>,
}

impl SolverStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize")
    }
}

/// Primal values at the chosen iteration: `z = l / alpha`, shifted by
/// `eps / m` on positive edges and truncated to 0 on untouched negatives.
pub fn extract_primal(state: &SolverState, g: &SignedGraph) -> Result<FractionalSolution, SolverError> {
    let snap = state.best.as_ref().ok_or(SolverError::SnapshotMissing)?;
    Ok(primal_from(snap, g, state.epsilon))
}

fn primal_from(snap: &Snapshot, g: &SignedGraph, epsilon: f64) -> FractionalSolution {
    let log_alpha = 3f64.ln() + snap.alpha_steps as f64 * epsilon.ln_1p();
    let shift = epsilon / g.m() as f64;
    let z = |k: u32| (k as f64 * epsilon - log_alpha).exp();
    let z_pos = snap.k_pos.iter().map(|&k| (z(k) + shift).min(1.0)).collect();
    let z_neg = snap.k_neg.iter().filter(|(_, &k)| k > 0).map(|(&key, &k)| (key, z(k).min(1.0))).collect();
    FractionalSolution::from_parts(z_pos, z_neg)
}

/// Iteration driver around a [`SolverState`].
pub struct Solver<'g> {
    g: &'g SignedGraph,
    cfg: SolverConfig,
    state: SolverState,
    guard: u64,
    stats: SolverStats,
    started: Instant,
}

impl<'g> Solver<'g> {
    /// Requires a connected graph with at least one open triangle.
    pub fn new(g: &'g SignedGraph, cfg: SolverConfig) -> Result<Self, SolverError> {
        if !g.is_connected() {
            return Err(SolverError::Disconnected);
        }
        if g.n() < 3 || g.is_complete_positive() {
            return Err(SolverError::NoOpenTriangle);
        }
        cfg.validate(g.m())?;
        let guard = cfg.max_iterations_guard.unwrap_or_else(|| SolverConfig::default_guard(cfg.epsilon, g.m()));
        let mut state = SolverState::new(g, cfg.epsilon);
        state.track_any = cfg.allow_unguarded_fallback;
        state.observe();
        Ok(Solver { g, cfg, state, guard, stats: SolverStats::default(), started: Instant::now() })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn is_done(&self) -> bool {
        self.state.is_terminated()
    }

    pub fn step(&mut self) -> IterationRecord {
        let rec = run_iteration(&mut self.state, self.g, self.cfg.seed, self.cfg.engine);
        self.stats.resets += rec.engine_resets as u64;
        self.stats.engine_rounds += rec.engine_rounds as u64;
        if rec.selected == 0 {
            self.stats.alpha_steps += 1;
        } else {
            self.stats.flow_steps += 1;
        }
        if self.state.iter.is_multiple_of(PHI_RECOMPUTE_PERIOD) {
            let exact = self.state.recompute_log_phi();
            let drift = (exact - self.state.log_phi).abs().exp_m1();
            self.stats.phi_max_drift = self.stats.phi_max_drift.max(drift);
            debug_assert!(drift <= PHI_DRIFT_TOLERANCE, "potential drifted by {drift}");
            self.state.log_phi = exact;
        }
        if self.cfg.record_history {
            self.stats.history.push(rec);
        }
        rec
    }

    /// Runs to termination and extracts the primal solution and certificate.
    pub fn run(mut self) -> Result<(FractionalSolution, DualCertificate, SolverStats), SolverError> {
        while !self.is_done() {
            if self.state.iter >= self.guard {
                return Err(SolverError::GuardExceeded { guard: self.guard });
            }
            self.step();
        }
        self.finish()
    }

    fn finish(mut self) -> Result<(FractionalSolution, DualCertificate, SolverStats), SolverError> {
        let s = &self.state;
        let (snap, fallback) = match (&s.best, &s.best_any) {
            (Some(b), _) => (b, false),
            (None, Some(b)) => (b, true),
            (None, None) => return Err(SolverError::SnapshotMissing),
        };
        let z = primal_from(snap, self.g, s.epsilon);
        let mut k_neg: Vec<(u64, u32)> = s.k_neg.iter().map(|(&k, &v)| (k, v)).collect();
        k_neg.sort_unstable();
        let cert = DualCertificate {
            objective: s.dual_objective(),
            k_pos: s.k_pos.clone(),
            k_neg,
            epsilon: s.epsilon,
            ln_m: s.ln_m,
        };
        let st = &mut self.stats;
        st.iterations = s.iter;
        st.alpha_final_log = s.log_alpha();
        st.primal_obj = z.objective;
        st.dual_obj = cert.objective;
        st.support_size = z.support_size;
        st.selections = s.selections;
        st.t_min = s.t_min;
        st.snapshot_iteration = snap.iteration;
        st.snapshot_alpha_log = 3f64.ln() + snap.alpha_steps as f64 * s.epsilon.ln_1p();
        st.max_congestion = cert.max_congestion();
        st.used_fallback = fallback;
        st.wall_time_ms = self.started.elapsed().as_secs_f64() * 1e3;
        Ok((z, cert, self.stats))
    }
}

/// Approximate two-hop covering LP with a dual certificate.
pub fn solve_primal2(
    g: &SignedGraph,
    cfg: &SolverConfig,
) -> Result<(FractionalSolution, DualCertificate, SolverStats), SolverError> {
    Solver::new(g, cfg.clone())?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GeneratorKind};
    use proptest::prelude::*;

    fn path() -> SignedGraph {
        SignedGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    fn largest_open_component(g: &SignedGraph) -> Option<SignedGraph> {
        g.components()
            .into_iter()
            .map(|c| c.graph)
            .filter(|h| h.n() >= 3 && !h.is_complete_positive())
            .max_by_key(|h| (h.m(), std::cmp::Reverse(h.n())))
    }

    #[test]
    fn path_objective_in_range() {
        let (z, cert, stats) = solve_primal2(&path(), &SolverConfig::new(0.1)).unwrap();
        assert!(z.objective >= 1.0 && z.objective <= 2.6, "objective {}", z.objective);
        assert!(cert.max_congestion() <= 1.0);
        assert!(z.worst_constraint(&path()).unwrap().1 >= -1e-9);
        assert!(stats.t_min.is_some());
        assert!(!stats.used_fallback);
    }

    #[test]
    fn first_iteration_on_path() {
        let g = path();
        let mut s = SolverState::new(&g, 0.1);
        assert_eq!(s.dual_objective(), 0.0);
        let rec = run_iteration(&mut s, &g, 0, EngineKind::Parallel);
        assert_eq!(rec.selected, 1);
        assert_eq!((s.k_positive(0), s.k_positive(1), s.k_negative(0, 2)), (1, 1, 1));
        assert_eq!(s.alpha_steps(), 0);
        assert!((s.dual_objective() - 0.01 / 2f64.ln()).abs() < 1e-15);
        // Each pair grew by exactly exp(eps).
        assert!((s.log_phi() - (3.0 * 0.1f64.exp()).ln()).abs() < 1e-12);
        // No eligible triangle remains: length 3e^0.1 > 3.3.
        let rec = run_iteration(&mut s, &g, 0, EngineKind::Parallel);
        assert_eq!(rec.selected, 0);
        assert_eq!(s.alpha_steps(), 1);
        assert_eq!(s.k_positive(0), 1);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = path();
        assert!(matches!(
            Solver::new(&g, SolverConfig::new(0.2)),
            Err(SolverError::EpsilonOutOfRange { .. })
        ));
        assert!(matches!(Solver::new(&g, SolverConfig::new(0.0)), Err(SolverError::EpsilonOutOfRange { .. })));
        let big = generate(GeneratorKind::GnpSigned, 30, 0.5, 1).unwrap();
        let (lo, _) = SolverConfig::epsilon_range(big.m());
        assert!((lo - 2.0 / big.m() as f64).abs() < 1e-15);
        let split = SignedGraph::from_edges(6, [(0, 1), (1, 2), (3, 4), (4, 5)]).unwrap();
        assert!(matches!(Solver::new(&split, SolverConfig::new(0.1)), Err(SolverError::Disconnected)));
        let k3 = SignedGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(matches!(Solver::new(&k3, SolverConfig::new(0.1)), Err(SolverError::NoOpenTriangle)));
        let mut cfg = SolverConfig::new(0.1);
        cfg.max_iterations_guard = Some(3);
        assert!(matches!(solve_primal2(&g, &cfg), Err(SolverError::GuardExceeded { guard: 3 })));
    }

    #[test]
    fn untouched_negative_pairs_are_dropped() {
        // Star with 3 leaves: all 3 leaf pairs are negative.
        let g = SignedGraph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let (z, cert, _) = solve_primal2(&g, &SolverConfig::new(0.1)).unwrap();
        let touched: Vec<u64> = cert.k_neg.iter().filter(|p| p.1 > 0).map(|p| p.0).collect();
        assert_eq!(z.z_neg.iter().map(|p| p.0).collect::<Vec<_>>(), touched);
        assert_eq!(z.support_size, g.m() + touched.len());
        assert!(z.z_pos.iter().all(|&x| x > 0.0 && x <= 1.0));
    }

    #[test]
    fn invariants_along_the_run() {
        for seed in 0..6u64 {
            let g = generate(GeneratorKind::GnpSigned, 9, 0.45, seed).unwrap();
            let Some(g) = largest_open_component(&g) else { continue };
            let eps = 0.1;
            let mut cfg = SolverConfig::new(eps).with_seed(seed);
            cfg.record_history = true;
            let mut solver = Solver::new(&g, cfg).unwrap();
            let mut same_alpha = 0u64;
            let mut last_alpha = solver.state().log_alpha();
            while !solver.is_done() {
                let rec = solver.step();
                let s = solver.state();
                assert!(rec.log_phi_after <= rec.log_phi_before + eps + 1e-12);
                assert!(rec.log_phi_after >= rec.log_phi_before);
                assert!(s.log_alpha() >= last_alpha);
                if s.log_alpha() == last_alpha {
                    same_alpha += 1;
                    let bound = 3.0 / eps * (eps.ln_1p() + last_alpha);
                    assert!(same_alpha as f64 <= bound, "{same_alpha} steps at one alpha");
                } else {
                    same_alpha = 0;
                    last_alpha = s.log_alpha();
                }
                assert!(s.max_congestion() <= 1.0 + 1e-12);
                let lm = (g.m() as f64).ln();
                assert!(s.log_alpha() <= 3f64.ln() + lm / eps + eps.ln_1p() + 1e-12);
                // Every open triangle is at least as long as alpha.
                g.for_each_open_triangle(|u, w, v| {
                    let t = OpenTriangle::new(u, w, v);
                    assert!(s.triangle_log_len(&g, &t) >= s.log_alpha() - 1e-12);
                });
            }
        }
    }

    #[test]
    fn potential_recompute_agrees() {
        let g = generate(GeneratorKind::GnpSigned, 14, 0.4, 2).unwrap();
        let g = largest_open_component(&g).unwrap();
        let mut solver = Solver::new(&g, SolverConfig::new(0.1)).unwrap();
        for _ in 0..300 {
            if solver.is_done() {
                break;
            }
            solver.step();
            let s = solver.state();
            assert!((s.recompute_log_phi() - s.log_phi()).abs() < 1e-10);
        }
    }

    #[test]
    fn dump_roundtrip() {
        let g = generate(GeneratorKind::GnpSigned, 10, 0.4, 4).unwrap();
        let g = largest_open_component(&g).unwrap();
        let (z, _, stats) = solve_primal2(&g, &SolverConfig::new(0.1)).unwrap();
        let text = z.to_text(&g);
        assert_eq!(FractionalSolution::parse(&text, &g).unwrap(), z);
        assert_eq!(FractionalSolution::parse(&text.replace(" - ", " − "), &g).unwrap(), z);
        assert!(FractionalSolution::parse("0 1 x 0.5\n", &g).is_err());
        let json: serde_json::Value = serde_json::from_str(&stats.to_json()).unwrap();
        for key in ["iterations", "resets", "alpha_final_log", "primal_obj", "dual_obj", "support_size", "wall_time_ms"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn engines_agree_on_feasibility() {
        let g = generate(GeneratorKind::GnpSigned, 12, 0.35, 8).unwrap();
        let g = largest_open_component(&g).unwrap();
        for engine in [EngineKind::Parallel, EngineKind::Greedy] {
            let mut cfg = SolverConfig::new(0.1);
            cfg.engine = engine;
            let (z, cert, _) = solve_primal2(&g, &cfg).unwrap();
            assert!(z.worst_constraint(&g).unwrap().1 >= -1e-9);
            assert!(z.objective <= 2.5 * cert.objective + 0.1);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn feasible_and_certified(n in 4usize..11, p in 0.2f64..0.7, seed in any::<u64>()) {
            let g = generate(GeneratorKind::GnpSigned, n, p, seed).unwrap();
            if let Some(g) = largest_open_component(&g) {
                let eps = 0.1;
                let (z, cert, stats) = solve_primal2(&g, &SolverConfig::new(eps).with_seed(seed)).unwrap();
                prop_assert!(z.worst_constraint(&g).unwrap().1 >= -1e-9);
                prop_assert!(z.z_pos.iter().chain(z.z_neg.iter().map(|p| &p.1)).all(|&x| (0.0..=1.0).contains(&x)));
                prop_assert!(cert.max_congestion() <= 1.0 + 1e-12);
                prop_assert!(z.objective <= (1.0 + 15.0 * eps) * cert.objective + eps);
                prop_assert!((stats.iterations as f64) <= SolverConfig::iteration_bound(eps, g.m()));
            }
        }
    }
}
