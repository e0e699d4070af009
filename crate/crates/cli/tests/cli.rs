use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use treeformat::{io, DenseTensor, DimensionTree, RankTol, RankTuple, TreeTensor};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treeformat"))
        .args(args)
        .env_remove("TT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is one JSON object")
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).expect("stderr is one JSON object")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn elementary_file_has_unit_ranks_under_every_tree() {
    let dir = tempfile::tempdir().unwrap();
    let f = path(dir.path(), "e.json");
    assert_eq!(run(&["gen", "--shape", "2,2,2", "--elementary", "--seed", "1", "--out", &f]).status.code(), Some(0));
    for tree in ["tucker", "linear", "balanced", "((1)(2)(3))"] {
        let out = run(&["rank", "--in", &f, "--tree", tree]);
        assert_eq!(out.status.code(), Some(0));
        let ranks = stdout_json(&out)["ranks"].as_object().unwrap().clone();
        assert!(ranks.values().all(|r| r == 1), "{tree}: {ranks:?}");
    }
}

#[test]
fn generated_tree_tensor_respects_caps() {
    let dir = tempfile::tempdir().unwrap();
    let f = path(dir.path(), "t.json");
    let notation = "(((1)(2))((3)(4)))";
    let out = run(&["gen", "--tree", notation, "--shape", "2,2,2,2", "--ranks", "all:2,root:1", "--seed", "3", "--out", &f]);
    assert_eq!(out.status.code(), Some(0));
    let t: TreeTensor<f64> = io::parse_tree_tensor(&std::fs::read_to_string(&f).unwrap()).unwrap();
    let tree: DimensionTree = notation.parse().unwrap();
    let caps = RankTuple::parse_spec(&tree, "all:2,root:1").unwrap();
    let r = treeformat::tree_rank(&t.evaluate(), &tree, &RankTol::default()).unwrap();
    assert!(r.leq(&caps));
}

#[test]
fn rank_violation_names_the_vertex_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let f = path(dir.path(), "bad.json");
    let out = run(&["gen", "--shape", "2,2,2", "--tree", "balanced", "--ranks", "all:3", "--out", &f]);
    assert_eq!(out.status.code(), Some(2));
    let diag = stderr_json(&out);
    assert_eq!(diag["error"], "RankViolation");
    assert!(diag["vertex"].is_string());
    assert!(!Path::new(&f).exists());
}

#[test]
fn usage_errors_exit_two() {
    for args in [&["bogus"][..], &["rank", "--nope"], &["compress", "--in", "x.json"]] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(stderr_json(&out)["error"], "UsageError");
    }
    let out = run(&["info", "--in", "/nonexistent/file.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compress_reconstruct_compare_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (d, t, r) = (path(dir.path(), "d.json"), path(dir.path(), "t.json"), path(dir.path(), "r.json"));
    assert!(run(&["gen", "--shape", "3,2,3,2", "--seed", "5", "--out", &d]).status.success());
    assert!(run(&["compress", "--in", &d, "--tree", "balanced", "--tol", "0", "--out", &t]).status.success());
    assert!(run(&["reconstruct", "--in", &t, "--out", &r]).status.success());
    let out = run(&["info", "--in", &r, "--compare", &d]);
    assert!(out.status.success());
    assert!(stdout_json(&out)["relative_error"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn truncate_and_approx_write_tree_tensors_within_caps() {
    let dir = tempfile::tempdir().unwrap();
    let d = path(dir.path(), "d.json");
    assert!(run(&["gen", "--shape", "3,3,3", "--seed", "2", "--out", &d]).status.success());
    let mut residuals = Vec::new();
    for verb in ["truncate", "approx"] {
        let o = path(dir.path(), &format!("{verb}.json"));
        let out = run(&[verb, "--in", &d, "--tree", "linear", "--ranks", "all:2,root:1", "--out", &o]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        residuals.push(stdout_json(&out)["residual"].as_f64().unwrap());
        let t: TreeTensor<f64> = io::parse_tree_tensor(&std::fs::read_to_string(&o).unwrap()).unwrap();
        assert!(t.ranks().as_slice().iter().all(|&r| r <= 2));
    }
    assert!(residuals[1] <= residuals[0]);
}

#[test]
fn verify_passes_on_random_files() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..10 {
        let f = path(dir.path(), &format!("v{seed}.json"));
        let s = seed.to_string();
        assert!(run(&["gen", "--shape", "3,3,3", "--seed", &s, "--out", &f]).status.success());
        let out = run(&["verify", "--in", &f, "--tree", "balanced", "--seed", &s]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn seed_controls_output_and_env_supplies_default() {
    let dir = tempfile::tempdir().unwrap();
    let files: Vec<PathBuf> = (0..3).map(|k| dir.path().join(format!("g{k}.json"))).collect();
    let f: Vec<String> = files.iter().map(|p| p.to_string_lossy().into_owned()).collect();
    assert!(run(&["gen", "--shape", "2,3", "--seed", "9", "--out", &f[0]]).status.success());
    let via_env = Command::new(env!("CARGO_BIN_EXE_treeformat"))
        .args(["gen", "--shape", "2,3", "--out", &f[1]])
        .env("TT_SEED", "9")
        .output()
        .unwrap();
    assert!(via_env.status.success());
    assert!(run(&["gen", "--shape", "2,3", "--seed", "10", "--out", &f[2]]).status.success());
    let bytes: Vec<Vec<u8>> = files.iter().map(|p| std::fs::read(p).unwrap()).collect();
    assert_eq!(bytes[0], bytes[1]);
    assert_ne!(bytes[0], bytes[2]);
    let v: DenseTensor<f64> = io::parse_dense(std::str::from_utf8(&bytes[0]).unwrap()).unwrap();
    assert_eq!(v.shape(), &[2, 3]);
}

#[test]
fn quiet_suppresses_summary() {
    let dir = tempfile::tempdir().unwrap();
    let f = path(dir.path(), "q.json");
    let out = run(&["--quiet", "gen", "--shape", "2,2", "--out", &f]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
}

#[test]
fn rank_all_subsets_reports_every_proper_subset() {
    let dir = tempfile::tempdir().unwrap();
    let f = path(dir.path(), "s.json");
    assert!(run(&["gen", "--shape", "2,2,2", "--sum", "2", "--seed", "4", "--out", &f]).status.success());
    let out = run(&["rank", "--in", &f, "--tree", "balanced", "--all-subsets"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    let subsets = v.as_object().unwrap().values().filter_map(|x| x.as_object()).map(|o| o.len()).max().unwrap();
    assert_eq!(subsets, 6);
}
