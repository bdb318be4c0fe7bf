//! End-to-end command-line checks against the committed fixtures.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_semnav")
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).to_string()
}

#[test]
fn run_suite_smoke_and_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    let suite = fixtures().join("rooms.json");

    for out in [&out_a, &out_b] {
        let o = run(&[
            "run",
            "--suite",
            suite.to_str().unwrap(),
            "--policy",
            "full",
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "stderr: {}", stderr(&o));
        assert!(out.join("metrics.csv").exists());
        assert!(out.join("traces").read_dir().unwrap().count() >= 3);
        assert!(out.join("plots").read_dir().unwrap().count() >= 3);
    }

    // identical seed twice: byte-identical metrics and traces
    let ma = std::fs::read(out_a.join("metrics.csv")).unwrap();
    let mb = std::fs::read(out_b.join("metrics.csv")).unwrap();
    assert_eq!(ma, mb);
    for entry in out_a.join("traces").read_dir().unwrap() {
        let name = entry.unwrap().file_name();
        let ta = std::fs::read(out_a.join("traces").join(&name)).unwrap();
        let tb = std::fs::read(out_b.join("traces").join(&name)).unwrap();
        assert_eq!(ta, tb, "trace {name:?} differs between runs");
    }
}

#[test]
fn run_policies_produce_comparable_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let suite = fixtures().join("rooms.json");
    for policy in ["full", "greedy-goal"] {
        let out = tmp.path().join(policy);
        let o = run(&[
            "run",
            "--suite",
            suite.to_str().unwrap(),
            "--policy",
            policy,
            "--seed",
            "3",
            "--no-plots",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "stderr: {}", stderr(&o));
        let csv = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
        assert!(csv.starts_with("policy,seed,episodes,sr,spl"));
        assert!(csv.contains(policy));
    }
}

#[test]
fn invalid_config_key_exits_2_and_names_it() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"seed": 1, "not_a_real_key": true}"#).unwrap();
    let o = run(&[
        "run",
        "--suite",
        fixtures().join("rooms.json").to_str().unwrap(),
        "--config",
        bad.to_str().unwrap(),
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "stderr: {}", stderr(&o));
    assert!(stderr(&o).contains("not_a_real_key"));
}

#[test]
fn missing_suite_exits_2() {
    let o = run(&["run", "--suite", "/nonexistent/suite.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_wtrp_weight_flip() {
    let o = run(&[
        "solve-wtrp",
        "--file",
        fixtures().join("wtrp/flip.json").to_str().unwrap(),
        "--exact",
    ]);
    assert!(o.status.success(), "stderr: {}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("order: 2 1"), "{text}");
    // weights scaled to (0,1]: objective is 27 / 10
    assert!(text.contains("objective: 2.7"), "{text}");
}

#[test]
fn solve_wtrp_rejects_malformed_matrix() {
    let o = run(&[
        "solve-wtrp",
        "--file",
        fixtures().join("wtrp/malformed.json").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("symmetric"), "stderr: {}", stderr(&o));
}

#[test]
fn solve_wtrp_exact_refuses_oversize() {
    let tmp = tempfile::tempdir().unwrap();
    let n = 20usize;
    let inst = serde_json::json!({
        "format": "wtrp-instance",
        "version": 1,
        "weights": vec![0.5; n],
        "matrix": vec![vec![0.0; n + 1]; n + 1],
    });
    let path = tmp.path().join("big.json");
    std::fs::write(&path, serde_json::to_string(&inst).unwrap()).unwrap();
    let o = run(&["solve-wtrp", "--file", path.to_str().unwrap(), "--exact"]);
    assert_eq!(o.status.code(), Some(2), "stderr: {}", stderr(&o));
    assert!(stderr(&o).contains("exact limit"));
}

#[test]
fn dump_graph_round_trips_losslessly() {
    let tmp = tempfile::tempdir().unwrap();
    let out1 = tmp.path().join("g1.json");
    let out2 = tmp.path().join("g2.json");
    let sample = fixtures().join("graphs/sample.json");

    let o = run(&[
        "dump-graph",
        "--graph",
        sample.to_str().unwrap(),
        "--out",
        out1.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "stderr: {}", stderr(&o));
    let o = run(&[
        "dump-graph",
        "--graph",
        out1.to_str().unwrap(),
        "--out",
        out2.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let b1 = std::fs::read(&out1).unwrap();
    let b2 = std::fs::read(&out2).unwrap();
    assert_eq!(b1, b2);
}

#[test]
fn dump_graph_from_scene_exploration() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("explored.json");
    let o = run(&[
        "dump-graph",
        "--scene",
        fixtures().join("scenes/rooms_1.json").to_str().unwrap(),
        "--instruction",
        "find the bed",
        "--steps",
        "40",
        "--seed",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "stderr: {}", stderr(&o));
    assert!(stdout(&o).contains("anchors"));
    assert!(out.exists());
}

#[test]
fn heatmap_brightest_at_source_and_boost_dominates() {
    let tmp = tempfile::tempdir().unwrap();
    let boosted = tmp.path().join("boost.pgm");
    let plain = tmp.path().join("plain.pgm");
    let sample = fixtures().join("graphs/sample.json");

    for (path, extra) in [(&boosted, None), (&plain, Some("--no-boost"))] {
        let mut args = vec![
            "heatmap",
            "--graph",
            sample.to_str().unwrap(),
            "--instruction",
            "find the bed",
            "--out",
            path.to_str().unwrap(),
        ];
        if let Some(flag) = extra {
            args.push(flag);
        }
        let o = run(&args);
        assert!(o.status.success(), "stderr: {}", stderr(&o));
    }

    let (wa, ha, a) = read_pgm(&boosted);
    let (wb, hb, b) = read_pgm(&plain);
    assert_eq!((wa, ha), (wb, hb));
    // task-aware gain never darkens any pixel
    assert!(a.iter().zip(&b).all(|(x, y)| x >= y));
    assert!(a.iter().zip(&b).any(|(x, y)| x > y) || a == b);
    assert!(a.iter().any(|&v| v > 0), "heatmap is all black");
}

fn read_pgm(path: &Path) -> (usize, usize, Vec<u8>) {
    let bytes = std::fs::read(path).unwrap();
    let header_end = bytes
        .windows(1)
        .enumerate()
        .filter(|(_, w)| w[0] == b'\n')
        .map(|(i, _)| i)
        .nth(2)
        .unwrap()
        + 1;
    let header = String::from_utf8_lossy(&bytes[..header_end]).to_string();
    let mut lines = header.lines();
    assert_eq!(lines.next(), Some("P5"));
    let dims: Vec<usize> = lines
        .next()
        .unwrap()
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    (dims[0], dims[1], bytes[header_end..].to_vec())
}

#[test]
fn compact_fixture_graph() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("pruned.json");
    let o = run(&[
        "compact",
        "--graph",
        fixtures().join("graphs/sample.json").to_str().unwrap(),
        "--r",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "stderr: {}", stderr(&o));
    assert!(stdout(&o).contains("total cost"));
    assert!(out.exists());
}
