//! End-to-end clustering: split into components, solve the LP on each
//! component that has an open triangle, round, and merge.

use serde::Serialize;

use crate::analysis::{disagreements, lp_objective};
use crate::error::SolverError;
use crate::graph::{Clustering, Component, SignedGraph};
use crate::hash::hash_keys;
use crate::lp::{solve_primal2, EngineKind, FractionalSolution, SolverConfig, SolverStats};
use crate::rounding::{round_assignment, Assignment};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub epsilon: f64,
    pub seed: u64,
    pub engine: EngineKind,
}

impl PipelineConfig {
    pub fn new(epsilon: f64, seed: u64) -> Self {
        PipelineConfig { epsilon, seed, engine: EngineKind::Parallel }
    }

    /// Epsilon used on a component with `m` positive edges: at least the
    /// smallest admissible value for that component.
    pub fn component_epsilon(&self, m: usize) -> f64 {
        self.epsilon.max(SolverConfig::epsilon_range(m).0)
    }
}

#[derive(Debug, Clone)]
pub enum ComponentPlan {
    /// Complete positive component (including isolated vertices): one cluster.
    Whole,
    Solved {
        z: FractionalSolution,
        assignment: Assignment,
        dual_obj: f64,
        stats: Box<SolverStats>,
    },
}

#[derive(Debug, Clone)]
pub struct SolvedComponent {
    pub component: Component,
    pub plan: ComponentPlan,
}

/// LP solutions of every component, ready to be rounded with any seed.
#[derive(Debug, Clone)]
pub struct SolvedGraph {
    pub n: usize,
    pub components: Vec<SolvedComponent>,
}

/// Solves every non-trivial component.
pub fn solve_graph(g: &SignedGraph, cfg: &PipelineConfig) -> Result<SolvedGraph, SolverError> {
    if !(cfg.epsilon.is_finite() && cfg.epsilon > 0.0 && cfg.epsilon <= 0.1) {
        return Err(SolverError::EpsilonOutOfRange { epsilon: cfg.epsilon, lo: 0.0, hi: 0.1, m: g.m() });
    }
    let mut components = Vec::new();
    for (idx, component) in g.components().into_iter().enumerate() {
        let h = &component.graph;
        let plan = if h.is_complete_positive() {
            ComponentPlan::Whole
        } else {
            let mut sc = SolverConfig::new(cfg.component_epsilon(h.m()));
            sc.seed = hash_keys(cfg.seed, &[idx as u64]);
            sc.engine = cfg.engine;
            let (z, cert, stats) = solve_primal2(h, &sc)?;
            ComponentPlan::Solved {
                assignment: Assignment::from_fractional(&z),
                z,
                dual_obj: cert.objective,
                stats: Box::new(stats),
            }
        };
        components.push(SolvedComponent { component, plan });
    }
    Ok(SolvedGraph { n: g.n(), components })
}

impl SolvedGraph {
    /// Rounds every component with a seed derived from `seed` and merges.
    pub fn round(&self, seed: u64) -> Clustering {
        let parts: Vec<Clustering> = self
            .components
            .iter()
            .enumerate()
            .map(|(idx, sc)| match &sc.plan {
                ComponentPlan::Whole => Clustering::single_cluster(sc.component.graph.n()),
                ComponentPlan::Solved { assignment, .. } => {
                    round_assignment(&sc.component.graph, assignment, hash_keys(seed, &[idx as u64]))
                }
            })
            .collect();
        let pairs: Vec<(&Component, &Clustering)> =
            self.components.iter().map(|sc| &sc.component).zip(parts.iter()).collect();
        Clustering::merge(self.n, &pairs)
    }

    fn solved(&self) -> impl Iterator<Item = (&SolvedComponent, &FractionalSolution, &Assignment, f64, &SolverStats)> {
        self.components.iter().filter_map(|sc| match &sc.plan {
            ComponentPlan::Solved { z, assignment, dual_obj, stats } => Some((sc, z, assignment, *dual_obj, &**stats)),
            ComponentPlan::Whole => None,
        })
    }

    pub fn primal_obj(&self) -> f64 {
        self.solved().map(|s| s.1.objective).sum()
    }

    pub fn dual_obj(&self) -> f64 {
        self.solved().map(|s| s.3).sum()
    }

    pub fn lp_objective(&self) -> f64 {
        self.solved().map(|s| lp_objective(s.2, &s.0.component.graph)).sum()
    }

    pub fn iterations(&self) -> u64 {
        self.solved().map(|s| s.4.iterations).sum()
    }

    pub fn support_size(&self) -> usize {
        self.solved().map(|s| s.1.support_size).sum()
    }

    pub fn solve_time_ms(&self) -> f64 {
        self.solved().map(|s| s.4.wall_time_ms).sum()
    }
}

/// Summary written next to a clustering.
#[derive(Debug, Clone, Serialize)]
pub struct ClusterStats {
    pub n: usize,
    pub m: usize,
    pub components: usize,
    pub solved_components: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub lp_obj: f64,
    pub cost: u64,
    pub clusters: usize,
    pub iterations: u64,
    pub support: usize,
    pub solve_ms: f64,
    pub round_ms: f64,
}

/// Solves, rounds with `cfg.seed`, and evaluates.
pub fn cluster_graph(g: &SignedGraph, cfg: &PipelineConfig) -> Result<(Clustering, ClusterStats), SolverError> {
    let solved = solve_graph(g, cfg)?;
    let t = std::time::Instant::now();
    let clustering = solved.round(cfg.seed);
    let round_ms = t.elapsed().as_secs_f64() * 1e3;
    let cost = disagreements(g, &clustering).expect("clustering covers the graph");
    let stats = ClusterStats {
        n: g.n(),
        m: g.m(),
        components: solved.components.len(),
        solved_components: solved.solved().count(),
        epsilon: cfg.epsilon,
        seed: cfg.seed,
        primal_obj: solved.primal_obj(),
        dual_obj: solved.dual_obj(),
        lp_obj: solved.lp_objective(),
        cost,
        clusters: clustering.cluster_count(),
        iterations: solved.iterations(),
        support: solved.support_size(),
        solve_ms: solved.solve_time_ms(),
        round_ms,
    };
    Ok((clustering, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::planted;

    #[test]
    fn trivial_inputs() {
        let k4 = SignedGraph::from_edges(4, (0..4).flat_map(|u| (u + 1..4).map(move |v| (u, v)))).unwrap();
        let (c, st) = cluster_graph(&k4, &PipelineConfig::new(0.1, 1)).unwrap();
        assert_eq!((c.cluster_count(), st.cost), (1, 0));
        let empty = SignedGraph::empty(5);
        let (c, st) = cluster_graph(&empty, &PipelineConfig::new(0.1, 1)).unwrap();
        assert_eq!((c, st.cost), (Clustering::singletons(5), 0));
    }

    #[test]
    fn path_cost_is_small() {
        let path = SignedGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let (_, st) = cluster_graph(&path, &PipelineConfig::new(0.1, 1)).unwrap();
        assert!((1..=3).contains(&st.cost));
        assert!(st.dual_obj <= 1.0);
    }

    #[test]
    fn components_are_merged() {
        let (g, truth) = planted(30, 3, 0.0, 2).unwrap();
        let (c, st) = cluster_graph(&g, &PipelineConfig::new(0.1, 9)).unwrap();
        assert_eq!(c, truth);
        assert_eq!((st.components, st.solved_components, st.cost), (3, 0, 0));
    }

    #[test]
    fn rejects_bad_epsilon() {
        let path = SignedGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert!(cluster_graph(&path, &PipelineConfig::new(0.5, 1)).is_err());
        assert!(cluster_graph(&path, &PipelineConfig::new(f64::NAN, 1)).is_err());
        // A small component runs at its own smallest admissible epsilon.
        assert_eq!(PipelineConfig::new(0.01, 1).component_epsilon(2), 0.1);
    }
}
