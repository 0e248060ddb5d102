use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinroute"))
        .args(args)
        .env_remove("SPINROUTE_SEED")
        .output()
        .unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn read(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn build_counts_and_bad_chain_length() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("n.json");
    let v = ok_json(&["build", "--lattice", "prototype", "--extent", "4", "--out", s(&out)]);
    assert_eq!(v["sites"], 13);
    assert_eq!(read(&out)["sites"].as_array().unwrap().len(), 13);
    let v = ok_json(&["build", "--lattice", "square", "--extent", "2,2", "--out", s(&out)]);
    assert_eq!(v["sites"], 36);
    let v = ok_json(&[
        "build", "--lattice", "triangular", "--extent", "4,4", "--chain-length", "5", "--periodic", "--out", s(&out),
    ]);
    assert_eq!(v["uniform_modulus"], true);
    let bad = run(&["build", "--lattice", "square", "--chain-length", "4", "--out", s(&out)]);
    assert_eq!(bad.status.code(), Some(2));
    let bad = run(&["build", "--lattice", "square", "--chain-length", "3", "--out", s(&out)]);
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(run(&["build"]).status.code(), Some(2));
}

#[test]
fn route_then_simulate_replays_bit_identically() {
    let dir = tempfile::tempdir().unwrap();
    let (net, sched, rep) = (dir.path().join("n.json"), dir.path().join("s.json"), dir.path().join("r.json"));
    ok_json(&["build", "--lattice", "prototype", "--extent", "6", "--out", s(&net)]);
    let out = run(&["route", "--net", s(&net), "--from", "4", "--to", "16", "--out", s(&sched), "--report", s(&rep)]);
    assert!(out.status.success());
    let r = read(&rep);
    let f = r["fidelity"].as_f64().unwrap();
    assert!(1.0 - f < 1e-9);

    let dumps: Vec<String> = (0..2)
        .map(|i| {
            let st = dir.path().join(format!("st{i}.json"));
            let sr = dir.path().join(format!("sr{i}.json"));
            let out = run(&[
                "simulate", "--net", s(&net), "--sched", s(&sched), "--input", "4", "--target", "16",
                "--out", s(&st), "--report", s(&sr),
            ]);
            assert!(out.status.success());
            assert_eq!(read(&sr)["fidelity"].as_f64().unwrap(), f);
            std::fs::read_to_string(&st).unwrap()
        })
        .collect();
    assert_eq!(dumps[0], dumps[1]);
}

#[test]
fn route_to_self_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let (net, sched, rep) = (dir.path().join("n.json"), dir.path().join("s.json"), dir.path().join("r.json"));
    ok_json(&["build", "--lattice", "prototype", "--extent", "4", "--out", s(&net)]);
    let out = run(&["route", "--net", s(&net), "--from", "7", "--to", "7", "--out", s(&sched), "--report", s(&rep)]);
    assert!(out.status.success());
    assert_eq!(read(&rep)["duration"].to_string(), "0.0");
}

#[test]
fn fault_wall_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("n.json");
    ok_json(&["build", "--lattice", "square", "--extent", "3,3", "--out", s(&net)]);
    let file = read(&net);
    let ports: Vec<String> = file["sites"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["id"].as_str().unwrap_or_default().to_string())
        .collect();
    let west = ports.iter().find(|p| p.as_str() == "b(0,1).br1.d1").unwrap().clone();
    let east = ports.iter().find(|p| p.as_str() == "b(2,1).br3.d1").unwrap().clone();
    let sched = dir.path().join("s.json");
    let out = run(&[
        "route", "--net", s(&net), "--from", &west, "--to", &east, "--faults", "1,0;1,1;1,2", "--out", s(&sched),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let open = run(&["route", "--net", s(&net), "--from", &west, "--to", &east, "--faults", "1,1", "--out", s(&sched)]);
    assert!(open.status.success(), "{}", String::from_utf8_lossy(&open.stderr));
}

#[test]
fn multi_packet_head_on_fails() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("n.json");
    ok_json(&["build", "--lattice", "prototype", "--extent", "6", "--out", s(&net)]);
    let sched = dir.path().join("s.json");
    let out = run(&[
        "route", "--net", s(&net), "--from", "4", "--to", "16", "--from", "16", "--to", "4", "--out", s(&sched),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_all_passes() {
    let out = run(&["verify", "--suite", "all"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn percolate_extremes_and_seed_override() {
    let v = ok_json(&["percolate", "--lattice", "square", "--size", "8", "--p", "1", "--trials", "10"]);
    assert_eq!(v["spanning"], 1.0);
    let v = ok_json(&["percolate", "--lattice", "triangular", "--size", "8", "--p", "0", "--trials", "10"]);
    assert_eq!(v["spanning"], 0.0);
    let a = ok_json(&["percolate", "--lattice", "triangular", "--size", "16", "--p", "0.5", "--trials", "100", "--seed", "7"]);
    let b = Command::new(env!("CARGO_BIN_EXE_spinroute"))
        .args(["percolate", "--lattice", "triangular", "--size", "16", "--p", "0.5", "--trials", "100", "--seed", "1"])
        .env("SPINROUTE_SEED", "7")
        .output()
        .unwrap();
    let b: Value = serde_json::from_slice(&b.stdout).unwrap();
    assert_eq!(a, b);
    let bad = Command::new(env!("CARGO_BIN_EXE_spinroute"))
        .args(["percolate", "--lattice", "square", "--size", "8", "--p", "0.5"])
        .env("SPINROUTE_SEED", "nope")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(run(&["percolate", "--lattice", "square", "--size", "8", "--p", "1.5"]).status.code(), Some(1));
}

#[test]
fn entangle_even_and_odd_d() {
    let v = ok_json(&["entangle", "--d", "2"]);
    assert!(1.0 - v["fidelity"].as_f64().unwrap() < 1e-9);
    assert!(!run(&["entangle", "--d", "3"]).status.success());
}
