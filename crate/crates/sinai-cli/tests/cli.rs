//! End-to-end tests of the `sinai` binary: exit codes, file outputs,
//! reproducibility.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sinai(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sinai"))
        .args(args)
        .current_dir(dir)
        .env_remove("SINAI_SEED")
        .env_remove("SINAI_WORKERS")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, contents: &str) {
    fs::write(dir.join(name), contents).unwrap();
}

const TWO_POINT: &str = r#"{"kind": "two-point-symmetric", "alpha": 0.25}"#;

/// Environment whose potential is a deep staircase valley: alphas encode
/// S / ln 3 = 6,5,4,3,2,1,2,1,0,-1,-2,-3,-2,-1,0,1,2,3,4 on [-8, 10].
fn staircase_env_json() -> String {
    let levels: [i64; 19] = [6, 5, 4, 3, 2, 1, 2, 1, 0, -1, -2, -3, -2, -1, 0, 1, 2, 3, 4];
    let mut alphas = vec!["0.75".to_string()];
    for w in levels.windows(2) {
        alphas.push(if w[1] > w[0] { "0.25" } else { "0.75" }.to_string());
    }
    format!(
        r#"{{"lo": -8, "hi": 10, "alpha": [{}], "eta0": 0.25, "sigma2": 1.2069, "seed": "fixture"}}"#,
        alphas.join(", ")
    )
}

#[test]
fn env_roundtrip_and_reruns_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "spec.json", TWO_POINT);
    let out = sinai(
        &["env", "--spec", "spec.json", "--lo", "-50", "--hi", "50", "--seed", "9", "--out", "env.json"],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let first = fs::read(dir.path().join("env.json")).unwrap();
    let out = sinai(
        &["env", "--spec", "spec.json", "--lo", "-50", "--hi", "50", "--seed", "9", "--out", "env2.json"],
        dir.path(),
    );
    assert!(out.status.success());
    let second = fs::read(dir.path().join("env2.json")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn env_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // missing spec file: I/O
    let out = sinai(
        &["env", "--spec", "missing.json", "--lo", "-5", "--hi", "5", "--out", "e.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    // hypothesis violation: validation, with the report on stderr
    write(
        dir.path(),
        "bad.json",
        r#"{"kind": "finite-support", "atoms": [[0.2, 0.7], [0.8, 0.3]]}"#,
    );
    let out = sinai(
        &["env", "--spec", "bad.json", "--lo", "-5", "--hi", "5", "--out", "e.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("mean_eps"), "stderr: {stderr}");
}

#[test]
fn valley_on_staircase_fixture() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "stair.json", &staircase_env_json());
    let out = sinai(
        &["valley", "--env", "stair.json", "--n", "48", "--p", "2", "--gamma", "0.1"],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["Mn_prime"], -1);
    assert_eq!(v["mn"], 3);
    assert_eq!(v["Mn"], 7);
}

#[test]
fn valley_failure_modes() {
    let dir = tempfile::tempdir().unwrap();
    // flat environment: no valley, domain failure
    let alphas = vec!["0.5"; 101].join(", ");
    write(
        dir.path(),
        "flat.json",
        &format!(
            r#"{{"lo": -50, "hi": 50, "alpha": [{alphas}], "eta0": 0.5, "sigma2": 1.0, "seed": "flat"}}"#
        ),
    );
    let out = sinai(&["valley", "--env", "flat.json", "--n", "1000"], dir.path());
    assert_eq!(out.status.code(), Some(3), "{out:?}");
    // n too small: validation
    write(dir.path(), "stair.json", &staircase_env_json());
    let out = sinai(
        &["valley", "--env", "stair.json", "--n", "10", "--p", "3"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn walk_writes_profile_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "spec.json", TWO_POINT);
    assert!(sinai(
        &["env", "--spec", "spec.json", "--lo", "-2000", "--hi", "2000", "--seed", "4", "--out", "env.json"],
        dir.path()
    )
    .status
    .success());
    let out = sinai(
        &["walk", "--env", "env.json", "--steps", "20000", "--seed", "2", "--out", "profile.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let csv = fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert!(csv.starts_with("site,count\n"));
    let total: u64 = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 20000);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("profile.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["n"], 20000);
    assert_eq!(meta["start"], 0);
    assert_eq!(meta["seed"], "2");
}

#[test]
fn exact_values_on_fixture() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "stair.json", &staircase_env_json());
    let out = sinai(
        &["exact", "--env", "stair.json", "ruin", "--a", "0", "--x", "1", "--b", "3"],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // downhill stretch of the staircase: alpha = 3/4 on 1..3, classic 9/13
    let p = v["p_b_before_a"].as_f64().unwrap();
    assert!((p - 9.0 / 13.0).abs() < 1e-12, "{p}");
    let out = sinai(
        &["exact", "--env", "stair.json", "local-time", "--from", "3", "--site", "6"],
        dir.path(),
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // (alpha_3 / alpha_6) exp(S_3 - S_6) = (0.75 / 0.25) / 27 = 1/9
    let lt = v["expected_local_time"].as_f64().unwrap();
    assert!((lt - 1.0 / 9.0).abs() < 1e-12, "{lt}");
}

#[test]
fn experiment_outputs_reproducible_across_workers_and_reruns() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "cfg.json",
        r#"{"n_grid": [10000], "trials": 6, "environments": 3, "seed": 5, "gamma": 1.0}"#,
    );
    for (out_dir, workers) in [("a", "1"), ("b", "8"), ("c", "1")] {
        let out = sinai(
            &["experiment", "--kind", "lln", "--config", "cfg.json", "--out-dir", out_dir, "--workers", workers],
            dir.path(),
        );
        assert!(out.status.success(), "{out:?}");
    }
    let a = fs::read(dir.path().join("a/lln.json")).unwrap();
    let b = fs::read(dir.path().join("b/lln.json")).unwrap();
    let c = fs::read(dir.path().join("c/lln.json")).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    let csv = fs::read_to_string(dir.path().join("a/lln.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7); // header + 6 records
    let json: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(json["version"], "1");
    assert_eq!(json["config"]["seed"], 5);
    assert_eq!(json["records"].as_array().unwrap().len(), 6);
}

#[test]
fn experiment_validation_is_exhaustive() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "cfg.json",
        r#"{"n_grid": [], "trials": 0, "seed": 1, "gamma": -2.0}"#,
    );
    let out = sinai(
        &["experiment", "--kind", "radius", "--config", "cfg.json", "--out-dir", "out"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    for needle in ["n_grid", "trials", "gamma"] {
        assert!(stderr.contains(needle), "missing {needle} in: {stderr}");
    }
    // unknown kind
    write(dir.path(), "ok.json", r#"{"n_grid": [10000], "trials": 1, "seed": 1}"#);
    let out = sinai(
        &["experiment", "--kind", "nope", "--config", "ok.json", "--out-dir", "out"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seed_env_var_applies_and_flag_wins() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "spec.json", TWO_POINT);
    let run = |extra: &[&str], env_seed: Option<&str>, out: &str| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_sinai"));
        cmd.args(["env", "--spec", "spec.json", "--lo", "-20", "--hi", "20", "--out", out])
            .args(extra)
            .current_dir(dir.path())
            .env_remove("SINAI_SEED");
        if let Some(s) = env_seed {
            cmd.env("SINAI_SEED", s);
        }
        assert!(cmd.output().unwrap().status.success());
        fs::read(dir.path().join(out)).unwrap()
    };
    let via_flag = run(&["--seed", "33"], None, "f.json");
    let via_env = run(&[], Some("33"), "e.json");
    let flag_beats_env = run(&["--seed", "33"], Some("77"), "fe.json");
    assert_eq!(via_flag, via_env);
    assert_eq!(via_flag, flag_beats_env);
}
