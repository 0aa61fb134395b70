use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "\
[grid]
L = 4
n = 32
[init]
gaussian = 5 1 0 0
[stepper]
ring_tol = 1e-2
[run]
t_end = 0.2
observe_every = 5
";

fn aggrosim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aggrosim")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn simulate_writes_reproducible_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.cfg", SMALL);
    let mut manifests = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let res = aggrosim(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
        let csv = std::fs::read_to_string(out.join("diagnostics.csv")).unwrap();
        assert!(csv.lines().count() > 2);
        assert!(out.join("config.txt").exists());
        manifests.push(std::fs::read_to_string(out.join("manifest.txt")).unwrap());
    }
    assert_eq!(manifests[0], manifests[1]);
    assert!(manifests[0].contains("diagnostics.csv"));
    assert!(manifests[0].contains("snapshot_000000.aggs"));
}

#[test]
fn boundary_contact_is_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "wide.cfg", "[grid]\nL = 2\nn = 32\n[kernel]\nkernel = zero\n[init]\ngaussian = 1 1 0 0\n[run]\nt_end = 2\n");
    let res = aggrosim(&["simulate", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn config_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", "[grid]\nL = 4\nwidth = 3\n");
    let res = aggrosim(&["simulate", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("line 3"), "{err}");

    let res = aggrosim(&["simulate", "--config", dir.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn verify_prints_json_lines() {
    let res = aggrosim(&["verify", "--suite", "entropy", "--seed", "7", "--trials", "3"]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let stdout = String::from_utf8(res.stdout).unwrap();
    let rows: Vec<serde_json::Value> = stdout.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(rows.len() >= 4);
    assert!(rows.iter().all(|r| r["ok"] == true));
    assert!(rows.iter().any(|r| r["seed"] == 9));
}

#[test]
fn sweep_virial_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.cfg", SMALL);
    let out = dir.path().join("virial");
    let res = aggrosim(&["sweep", "--experiment", "virial_check", "--config", &cfg, "--values", "4", "--out", out.to_str().unwrap()]);
    assert!(matches!(res.status.code(), Some(0..=2)), "{}", String::from_utf8_lossy(&res.stderr));
    let table = std::fs::read_to_string(out.join("virial_check.csv")).unwrap();
    assert_eq!(table, String::from_utf8(res.stdout).unwrap());
}

#[test]
fn unknown_names_are_rejected() {
    assert_ne!(aggrosim(&["verify", "--suite", "nope"]).status.code(), Some(0));
    assert_ne!(aggrosim(&["sweep", "--experiment", "nope", "--config", "x"]).status.code(), Some(0));
}
