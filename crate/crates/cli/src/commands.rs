use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use corrclust::analysis::{certify_grid, disagreements, grid_csv, lp_objective};
use corrclust::graph::{generate, planted, Clustering, GeneratorKind, SignedGraph};
use corrclust::lp::{solve_primal2, EngineKind, FractionalSolution, SolverConfig};
use corrclust::oracles::{brute_force_opt, reduction_repetitions, triangle_detect_reduction_reps, OracleBudget};
use corrclust::pipeline::{cluster_graph, solve_graph, PipelineConfig};
use corrclust::rounding::{round_assignment, Assignment};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

const FEASIBILITY_TOL: f64 = 1e-9;

pub fn stats_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".stats.json");
    PathBuf::from(s)
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn write_stats(output: &Path, stats: &impl Serialize) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(stats).expect("stats serialize");
    write(&stats_path(output), &(json + "\n"))
}

fn load_graph(path: &Path) -> Result<SignedGraph, CliError> {
    SignedGraph::load(path).map_err(|e| CliError::graph(path, e))
}

fn load_clustering(path: &Path) -> Result<Clustering, CliError> {
    Clustering::load(path).map_err(|e| CliError::graph(path, e))
}

fn load_fractional(path: &Path, g: &SignedGraph) -> Result<FractionalSolution, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    FractionalSolution::parse(&text, g).map_err(|e| CliError::graph(path, e))
}

fn engine(cfg: &RunConfig) -> Result<EngineKind, CliError> {
    match cfg.get("engine", "parallel".to_string())?.as_str() {
        "parallel" => Ok(EngineKind::Parallel),
        "greedy" => Ok(EngineKind::Greedy),
        other => Err(CliError::Config(format!("unknown engine {other:?}"))),
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

pub fn gen(cfg: &RunConfig) -> Result<(), CliError> {
    let out = cfg.require_output()?;
    let n: usize = cfg.get("n", 12)?;
    let param: f64 = cfg.get("param", 0.15)?;
    let clusters: usize = cfg.get("clusters", 3)?;
    let kind = cfg.get("kind", "planted".to_string())?;
    let g = match kind.as_str() {
        "planted" => {
            let (g, truth) = planted(n, clusters, param, cfg.seed).map_err(|e| CliError::graph(out, e))?;
            let mut truth_path = out.as_os_str().to_owned();
            truth_path.push(".truth");
            write(Path::new(&truth_path), &truth.to_text())?;
            g
        }
        "gnp" => generate(GeneratorKind::GnpSigned, n, param, cfg.seed).map_err(|e| CliError::graph(out, e))?,
        other => return Err(CliError::Config(format!("unknown generator {other:?}"))),
    };
    write(out, &g.to_edge_list())?;
    println!("generated {kind} graph n={} m={}", g.n(), g.m());
    Ok(())
}

pub fn solve(cfg: &RunConfig) -> Result<(), CliError> {
    let g = load_graph(cfg.require_input()?)?;
    let out = cfg.require_output()?;
    let mut sc = SolverConfig::new(cfg.epsilon).with_seed(cfg.seed);
    sc.engine = engine(cfg)?;
    sc.allow_unguarded_fallback = cfg.get("fallback", false)?;
    sc.max_iterations_guard = cfg.get_opt("guard")?;
    let (z, cert, stats) = solve_primal2(&g, &sc)?;
    write(out, &z.to_text(&g))?;
    write(&stats_path(out), &(stats.to_json() + "\n"))?;
    println!(
        "primal {:.6} dual {:.6} iterations {} support {}",
        z.objective, cert.objective, stats.iterations, z.support_size
    );
    Ok(())
}

#[derive(Serialize)]
struct RoundStats {
    seed: u64,
    cost: u64,
    clusters: usize,
    lp_obj: f64,
    round_ms: f64,
}

pub fn round(cfg: &RunConfig) -> Result<(), CliError> {
    let g = load_graph(cfg.require_input()?)?;
    let out = cfg.require_output()?;
    let z = load_fractional(&cfg.require_path("fractional")?, &g)?;
    let a = Assignment::from_fractional(&z);
    let t = Instant::now();
    let c = round_assignment(&g, &a, cfg.seed);
    let round_ms = ms(t);
    let cost = disagreements(&g, &c).expect("rounding covers the graph");
    write(out, &c.to_text())?;
    let stats = RoundStats { seed: cfg.seed, cost, clusters: c.cluster_count(), lp_obj: lp_objective(&a, &g), round_ms };
    write_stats(out, &stats)?;
    println!("cost {cost} clusters {}", stats.clusters);
    Ok(())
}

pub fn cluster(cfg: &RunConfig) -> Result<(), CliError> {
    let g = load_graph(cfg.require_input()?)?;
    let out = cfg.require_output()?;
    let mut pc = PipelineConfig::new(cfg.epsilon, cfg.seed);
    pc.engine = engine(cfg)?;
    let (c, stats) = cluster_graph(&g, &pc)?;
    write(out, &c.to_text())?;
    write_stats(out, &stats)?;
    println!("cost {} clusters {} lp {:.6} dual {:.6}", stats.cost, stats.clusters, stats.lp_obj, stats.dual_obj);
    Ok(())
}

pub fn eval(cfg: &RunConfig) -> Result<(), CliError> {
    let g = load_graph(cfg.require_input()?)?;
    let path = cfg.require_path("clustering")?;
    let c = load_clustering(&path)?;
    let d = disagreements(&g, &c).map_err(|e| CliError::graph(&path, e))?;
    println!("disagreements {d}");
    Ok(())
}

pub fn verify(cfg: &RunConfig) -> Result<(), CliError> {
    let g = load_graph(cfg.require_input()?)?;
    let (fractional, clustering) = (cfg.path("fractional"), cfg.path("clustering"));
    if fractional.is_none() && clustering.is_none() {
        return Err(CliError::Config("verify needs --fractional or --clustering".into()));
    }
    if let Some(path) = fractional {
        let z = load_fractional(&path, &g)?;
        if let Some(x) = z.z_pos.iter().chain(z.z_neg.iter().map(|p| &p.1)).find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(CliError::Check(format!("value {x} outside [0, 1]")));
        }
        match z.worst_constraint(&g) {
            Some((t, slack)) if slack < -FEASIBILITY_TOL => {
                return Err(CliError::Check(format!(
                    "constraint violated on ({}, {}, {}) by {:.3e}",
                    t.u, t.w, t.v, -slack
                )));
            }
            Some((_, slack)) => println!("fractional feasible, objective {:.6}, min slack {slack:.3e}", z.objective),
            None => println!("fractional feasible, objective {:.6}, no open triangles", z.objective),
        }
    }
    if let Some(path) = clustering {
        let c = load_clustering(&path)?;
        let d = disagreements(&g, &c).map_err(|e| CliError::Check(e.to_string()))?;
        println!("clustering valid, {} clusters, disagreements {d}", c.cluster_count());
    }
    Ok(())
}

pub fn bench(cfg: &RunConfig) -> Result<(), CliError> {
    let instances: u64 = cfg.get("instances", 20)?;
    let n: usize = cfg.get("n", 12)?;
    let clusters: usize = cfg.get("clusters", 3)?;
    let noise: f64 = cfg.get("noise", 0.15)?;
    let seeds: u64 = cfg.get("seeds", 100)?;
    if seeds < 2 {
        return Err(CliError::Config("seeds must be at least 2".into()));
    }
    let mut pc = PipelineConfig::new(cfg.epsilon, 0);
    pc.engine = engine(cfg)?;
    let mut csv = String::from("instance,n,m,opt,dual_obj,lp_obj,mean_cost,stderr,mean_cost_over_opt,mean_cost_over_lp\n");
    for i in 0..instances {
        let seed = cfg.seed.wrapping_add(i);
        let (g, _) = planted(n, clusters, noise, seed).map_err(|e| CliError::Config(e.to_string()))?;
        let opt = if n <= OracleBudget::default().max_n { Some(brute_force_opt(&g, &OracleBudget::default())?.0) } else { None };
        pc.seed = seed;
        let solved = solve_graph(&g, &pc)?;
        let costs: Vec<f64> =
            (0..seeds).map(|s| disagreements(&g, &solved.round(s)).expect("rounding covers the graph") as f64).collect();
        let k = costs.len() as f64;
        let mean = costs.iter().sum::<f64>() / k;
        let se = (costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt();
        let lp = solved.lp_objective();
        let opt_s = opt.map(|o| o.to_string()).unwrap_or_default();
        let over_opt = opt.map(|o| ratio(mean, o as f64).to_string()).unwrap_or_default();
        let _ = writeln!(
            csv,
            "{i},{},{},{opt_s},{},{lp},{mean},{se},{over_opt},{}",
            g.n(),
            g.m(),
            solved.dual_obj(),
            ratio(mean, lp)
        );
    }
    match &cfg.output {
        Some(out) => write(out, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn ratio(x: f64, y: f64) -> f64 {
    match (x == 0.0, y == 0.0) {
        (true, true) => 1.0,
        (false, true) => f64::INFINITY,
        _ => x / y,
    }
}

#[derive(Serialize)]
struct ReduceStats {
    n: usize,
    m: usize,
    seed: u64,
    repetitions: usize,
    triangle: bool,
}

pub fn reduce_demo(cfg: &RunConfig) -> Result<(), CliError> {
    let h = load_graph(cfg.require_input()?)?;
    let repetitions: usize = cfg.get("reps", reduction_repetitions(h.n()))?;
    let triangle = triangle_detect_reduction_reps(&h, cfg.seed, repetitions);
    println!("triangle {triangle} repetitions {repetitions}");
    if let Some(out) = &cfg.output {
        let stats = ReduceStats { n: h.n(), m: h.m(), seed: cfg.seed, repetitions, triangle };
        write(out, &(serde_json::to_string_pretty(&stats).expect("stats serialize") + "\n"))?;
    }
    Ok(())
}

pub fn analyze_grid(cfg: &RunConfig) -> Result<(), CliError> {
    let steps: usize = cfg.get("steps", 201)?;
    if steps < 2 {
        return Err(CliError::Config("steps must be at least 2".into()));
    }
    let cert = certify_grid(steps);
    if let Some(out) = &cfg.output {
        write(out, &grid_csv(steps))?;
        write_stats(out, &cert)?;
    }
    println!("{}", serde_json::to_string(&cert).expect("certificate serialize"));
    Ok(())
}
