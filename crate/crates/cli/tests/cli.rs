use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use corrclust::analysis::disagreements;
use corrclust::graph::{Clustering, SignedGraph};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_corrclust"));
    for (k, _) in std::env::vars() {
        if k.starts_with("CORRCLUST_") {
            c.env_remove(k);
        }
    }
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_graph(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stats(p: &Path) -> serde_json::Value {
    let mut sp = p.as_os_str().to_owned();
    sp.push(".stats.json");
    serde_json::from_str(&fs::read_to_string(sp).unwrap()).unwrap()
}

#[test]
fn cluster_path_graph() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_graph(dir.path(), "path.txt", "3 2\n0 1\n1 2\n");
    let out = dir.path().join("c.txt");
    let o = run(&["cluster", "--input", s(&g), "--output", s(&out), "--epsilon", "0.1", "--seed", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let c = Clustering::load(&out).unwrap();
    let cost = disagreements(&SignedGraph::load(&g).unwrap(), &c).unwrap();
    assert!((1..=3).contains(&cost));
    let st = stats(&out);
    assert_eq!(st["cost"].as_u64().unwrap(), cost);
    for key in ["primal_obj", "dual_obj", "iterations", "support", "solve_ms", "round_ms"] {
        assert!(st.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn cluster_trivial_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let k4 = write_graph(dir.path(), "k4.txt", "4 6\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n");
    let empty = write_graph(dir.path(), "e.txt", "5 0\n");
    let out = dir.path().join("c.txt");
    assert_eq!(code(&run(&["cluster", "--input", s(&k4), "--output", s(&out)])), 0);
    assert_eq!(Clustering::load(&out).unwrap(), Clustering::single_cluster(4));
    assert_eq!(stats(&out)["cost"], 0);
    assert_eq!(code(&run(&["cluster", "--input", s(&empty), "--output", s(&out)])), 0);
    assert_eq!(Clustering::load(&out).unwrap(), Clustering::singletons(5));
    assert_eq!(stats(&out)["cost"], 0);
}

#[test]
fn generated_graph_feeds_cluster_and_eval() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    let c = dir.path().join("c.txt");
    assert_eq!(code(&run(&["gen", "--kind", "planted", "--n", "8", "--param", "0.2", "--seed", "4", "--output", s(&g)])), 0);
    assert_eq!(SignedGraph::load(&g).unwrap().n(), 8);
    assert_eq!(code(&run(&["cluster", "--input", s(&g), "--output", s(&c), "--seed", "2"])), 0);
    let o = run(&["eval", "--input", s(&g), "--clustering", s(&c)]);
    assert_eq!(code(&o), 0);
    let expected = disagreements(&SignedGraph::load(&g).unwrap(), &Clustering::load(&c).unwrap()).unwrap();
    assert_eq!(stdout(&o).trim(), format!("disagreements {expected}"));
}

#[test]
fn solve_round_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    let z = dir.path().join("z.txt");
    let c = dir.path().join("c.txt");
    assert_eq!(code(&run(&["gen", "--kind", "gnp", "--n", "14", "--param", "0.4", "--seed", "3", "--output", s(&g)])), 0);
    let graph = SignedGraph::load(&g).unwrap();
    assert!(graph.is_connected());
    assert_eq!(code(&run(&["solve", "--input", s(&g), "--output", s(&z), "--seed", "5"])), 0);
    let st = stats(&z);
    for key in ["iterations", "resets", "alpha_final_log", "primal_obj", "dual_obj", "support_size", "wall_time_ms"] {
        assert!(st.get(key).is_some(), "missing {key}");
    }
    assert_eq!(code(&run(&["round", "--input", s(&g), "--fractional", s(&z), "--output", s(&c), "--seed", "7"])), 0);
    let o = run(&["verify", "--input", s(&g), "--fractional", s(&z), "--clustering", s(&c)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("fractional feasible"));
}

#[test]
fn verify_rejects_infeasible_dump() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_graph(dir.path(), "path.txt", "3 2\n0 1\n1 2\n");
    let z = write_graph(dir.path(), "z.txt", "0 1 + 0.2\n1 2 + 0.2\n0 2 - 0.2\n");
    assert_eq!(code(&run(&["verify", "--input", s(&g), "--fractional", s(&z)])), 1);
    let z = write_graph(dir.path(), "z2.txt", "0 1 + 0.2\n1 2 + 0.2\n0 2 \u{2212} 0.6\n");
    assert_eq!(code(&run(&["verify", "--input", s(&g), "--fractional", s(&z)])), 0);
}

#[test]
fn output_is_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    assert_eq!(code(&run(&["gen", "--n", "40", "--param", "0.2", "--seed", "8", "--output", s(&g)])), 0);
    for seed in ["0", "1", "2"] {
        let outputs: Vec<Vec<u8>> = ["1", "4", "8"]
            .iter()
            .map(|w| {
                let c = dir.path().join(format!("c{w}.txt"));
                assert_eq!(code(&run(&["cluster", "--input", s(&g), "--output", s(&c), "--seed", seed, "--workers", w])), 0);
                fs::read(&c).unwrap()
            })
            .collect();
        assert!(outputs.iter().all(|o| *o == outputs[0]), "seed {seed}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_graph(dir.path(), "path.txt", "3 2\n0 1\n1 2\n");
    let out = dir.path().join("o.txt");
    let missing = dir.path().join("missing.txt");
    assert_eq!(code(&run(&["cluster", "--input", s(&missing), "--output", s(&out)])), 3);
    let bad = write_graph(dir.path(), "bad.txt", "3 1\n0 7\n");
    assert_eq!(code(&run(&["cluster", "--input", s(&bad), "--output", s(&out)])), 3);
    assert_eq!(code(&run(&["cluster", "--input", s(&g), "--output", s(&out), "--epsilon", "0.5"])), 2);
    assert_eq!(code(&run(&["cluster", "--input", s(&g), "--output", s(&out), "--workers", "0"])), 2);
    assert_eq!(code(&run(&["cluster", "--input", s(&g)])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["solve", "--input", s(&g), "--output", s(&out), "--guard", "0"])), 4);
    let two = write_graph(dir.path(), "two.txt", "4 1\n0 1\n");
    assert_eq!(code(&run(&["solve", "--input", s(&two), "--output", s(&out)])), 2);
    let dir_as_output = dir.path().to_path_buf();
    assert_eq!(code(&run(&["cluster", "--input", s(&g), "--output", s(&dir_as_output)])), 3);
}

#[test]
fn config_file_env_and_flags_layer() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_graph(dir.path(), "path.txt", "3 2\n0 1\n1 2\n");
    let out = dir.path().join("c.txt");
    let cfg = write_graph(dir.path(), "run.toml", &format!("epsilon = 0.08\nseed = 11\ninput = {:?}\n", s(&g)));
    let o = run(&["cluster", "--config", s(&cfg), "--output", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!((stats(&out)["epsilon"].as_f64(), stats(&out)["seed"].as_u64()), (Some(0.08), Some(11)));
    let o = bin().args(["cluster", "--config", s(&cfg), "--output", s(&out)]).env("CORRCLUST_SEED", "12").output().unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(stats(&out)["seed"], 12);
    let o = bin()
        .args(["cluster", "--config", s(&cfg), "--output", s(&out), "--seed", "13"])
        .env("CORRCLUST_SEED", "12")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(stats(&out)["seed"], 13);
    let o = bin().args(["cluster", "--config", s(&cfg), "--output", s(&out)]).env("CORRCLUST_EPSILON", "2").output().unwrap();
    assert_eq!(code(&o), 2);
    let broken = write_graph(dir.path(), "broken.toml", "epsilon = = 1\n");
    assert_eq!(code(&run(&["cluster", "--config", s(&broken), "--input", s(&g), "--output", s(&out)])), 2);
}

#[test]
fn bench_reports_ratio_to_opt() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bench.csv");
    let o = run(&["bench", "--instances", "20", "--n", "10", "--seeds", "20", "--seed", "1", "--output", s(&csv)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "mean_cost_over_opt").unwrap();
    let rows: Vec<f64> = lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect();
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|&r| r >= 1.0 && r.is_finite()), "{rows:?}");
}

#[test]
fn reduce_demo_and_grid() {
    let dir = tempfile::tempdir().unwrap();
    let tri = write_graph(dir.path(), "tri.txt", "5 4\n0 1\n0 2\n1 2\n3 4\n");
    let o = run(&["reduce-demo", "--input", s(&tri), "--seed", "3"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("triangle true"));
    let free = write_graph(dir.path(), "free.txt", "4 4\n0 1\n1 2\n2 3\n0 3\n");
    assert!(stdout(&run(&["reduce-demo", "--input", s(&free)])).starts_with("triangle false"));
    let csv = dir.path().join("grid.csv");
    assert_eq!(code(&run(&["analyze-grid", "--steps", "11", "--output", s(&csv)])), 0);
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("type,a,b,c,ALG,LP,C"));
    assert!(stats(&csv)["ppn_max_c"].as_f64().unwrap() <= 1e-12);
}
