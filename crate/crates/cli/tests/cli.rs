use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn qyao(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qyao")).args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn builtin_identity_accepts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("identity-path2.toml");
    let out = qyao(&["run", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&dir.path().join("verdict.json"));
    assert_eq!(v["verdict"]["accepted"], true);
    assert!(v["fidelity"].as_f64().unwrap() >= 1.0 - 1e-9);
    let transcript = std::fs::read_to_string(dir.path().join("transcript.jsonl")).unwrap();
    assert!(transcript.lines().count() > 3);
}

#[test]
fn noninteractive_cnot_reports_otm_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("cnot.toml");
    let out = qyao(&["run", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&dir.path().join("verdict.json"));
    assert!(v["fidelity"].as_f64().unwrap() >= 1.0 - 1e-9);
    let count = v["otm_count"].as_u64().unwrap();
    let delivered = std::fs::read_to_string(dir.path().join("transcript.jsonl"))
        .unwrap()
        .lines()
        .find_map(|l| {
            let e: Value = serde_json::from_str(l).unwrap();
            (e["type"] == "otm_delivery").then(|| e["count"].as_u64()).flatten()
        });
    assert_eq!(delivered, Some(count));
    assert!(dir.path().join("otm_table.jsonl").exists());
}

#[test]
fn missing_seed_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "builtin = \"identity-path2\"\n").unwrap();
    let out = qyao(&["run", "--config", cfg.to_str().unwrap()], &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
    // the flag supplies it
    let out = qyao(&["run", "--config", cfg.to_str().unwrap(), "--seed", "3"], &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn unknown_builtin_and_bad_flags_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "seed = 1\nbuiltin = \"nope\"\n").unwrap();
    assert_eq!(qyao(&["run", "--config", cfg.to_str().unwrap()], dir.path()).status.code(), Some(64));
    assert_eq!(qyao(&["run", "--config", cfg.to_str().unwrap(), "--mode", "sideways"], dir.path()).status.code(), Some(64));
}

#[test]
fn attack_with_honest_strategy_file_is_clean() {
    let dir = tempfile::tempdir().unwrap();
    let strategy = dir.path().join("honest.toml");
    std::fs::write(&strategy, "attack = \"honest\"\n").unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "seed = 9\nbuiltin = \"identity-path2\"\ntrials = 40\nstrategy = \"honest.toml\"\n").unwrap();
    let out = qyao(&["attack", "--config", cfg.to_str().unwrap(), "--jobs", "2"], &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&dir.path().join("o/stats.json"));
    assert_eq!(v["accept_corrupt"], 0);
    assert_eq!(v["accept_correct"], 40);
}

#[test]
fn bundled_random_pauli_respects_bound_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("attack-random-pauli.toml");
    let a = qyao(&["attack", "--config", cfg.to_str().unwrap()], &dir.path().join("a"));
    let b = qyao(&["attack", "--config", cfg.to_str().unwrap(), "--jobs", "3"], &dir.path().join("b"));
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(b.status.code(), Some(0));
    let sa = std::fs::read(dir.path().join("a/stats.json")).unwrap();
    let sb = std::fs::read(dir.path().join("b/stats.json")).unwrap();
    assert_eq!(sa, sb);
    let v: Value = serde_json::from_slice(&sa).unwrap();
    assert_eq!(v["trials"], 10_000);
    assert_eq!(v["within_bound"], true);
    assert_eq!(v["d"], 1);
}

#[test]
fn run_output_is_byte_identical_on_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("cnot.toml");
    qyao(&["run", "--config", cfg.to_str().unwrap()], &dir.path().join("a"));
    qyao(&["run", "--config", cfg.to_str().unwrap()], &dir.path().join("b"));
    for f in ["transcript.jsonl", "verdict.json", "otm_table.jsonl"] {
        assert_eq!(std::fs::read(dir.path().join("a").join(f)).unwrap(), std::fs::read(dir.path().join("b").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn exact_blindness_on_single_vertex() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("blindness-single.toml");
    let out = qyao(&["blindness", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&dir.path().join("blindness.json"));
    assert!(v["trace_distance"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn identical_setups_have_zero_distance_and_mismatch_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let same = dir.path().join("same.toml");
    std::fs::write(&same, "seed = 1\nbuiltin = \"single-vertex\"\n[blindness]\nkind = \"exact\"\n").unwrap();
    let out = qyao(&["blindness", "--config", same.to_str().unwrap()], &dir.path().join("s"));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(read_json(&dir.path().join("s/blindness.json"))["trace_distance"].as_f64().unwrap() < 1e-12);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "seed = 1\nbuiltin = \"single-vertex\"\n[blindness]\nbuiltin = \"identity-path2\"\n").unwrap();
    assert_eq!(qyao(&["blindness", "--config", bad.to_str().unwrap()], &dir.path().join("b")).status.code(), Some(64));
}
