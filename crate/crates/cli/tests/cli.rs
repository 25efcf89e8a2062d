//! End-to-end tests of the binary: generator counts, schedule output lines,
//! exit codes, and experiment sweeps.

use std::path::Path;
use std::process::{Command, Output};

use sinrsched_core::Instance;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sinrsched"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn generate_families_produce_expected_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["generate", "firstfit-tree", "--k", "5", "--delta", "0", "--out", "t.json"]);
    assert!(out.status.success());
    let inst = Instance::load(&dir.path().join("t.json")).unwrap();
    assert_eq!(inst.n(), 32);

    let out = run_in(dir.path(), &["generate", "general-metric", "--k", "3", "--out", "g.json"]);
    assert!(out.status.success());
    let inst = Instance::load(&dir.path().join("g.json")).unwrap();
    assert_eq!(inst.n(), 21);

    let out = run_in(dir.path(), &["generate", "random", "--n", "0", "--out", "e.json"]);
    assert!(out.status.success());
    let inst = Instance::load(&dir.path().join("e.json")).unwrap();
    assert!(inst.is_empty());
}

#[test]
fn schedule_single_link_and_tree() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_in(dir.path(), &["generate", "random", "--n", "1", "--out", "one.json"]).status.success());
    let out = run_in(
        dir.path(),
        &["schedule", "one.json", "--algo", "conflict", "--gamma", "2", "--delta", "0.9", "--tau", "0.8"],
    );
    assert!(out.status.success());
    assert!(stdout(&out).contains("slots=1 verified=true"), "{}", stdout(&out));

    assert!(run_in(dir.path(), &["generate", "firstfit-tree", "--k", "6", "--out", "lk6.json"])
        .status
        .success());
    let out = run_in(dir.path(), &["schedule", "lk6.json", "--algo", "first-fit", "--tau", "0"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let slots: usize = text
        .split("slots=")
        .nth(1)
        .and_then(|s| s.split_whitespace().next())
        .and_then(|s| s.parse().ok())
        .unwrap();
    assert!(slots >= 4, "{text}");
}

#[test]
fn invalid_tau_exits_2_and_names_interval() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_in(dir.path(), &["generate", "random", "--n", "4", "--out", "i.json"]).status.success());
    let out = run_in(
        dir.path(),
        &["schedule", "i.json", "--algo", "conflict", "--gamma", "2", "--delta", "0.9", "--tau", "0.95"],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("(0.7") && err.contains("0.93"), "stderr: {err}");
}

#[test]
fn randomized_schedule_reports_rounds() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_in(dir.path(), &["generate", "random", "--n", "6", "--seed", "4", "--out", "r.json"])
        .status
        .success());
    let out = run_in(
        dir.path(),
        &["schedule", "r.json", "--algo", "randomized", "--probs", "constant:1", "--cap", "50", "--seed", "1"],
    );
    assert!(out.status.success());
    assert!(stdout(&out).contains("rounds="), "{}", stdout(&out));
}

#[test]
fn feasible_prints_margin_with_twelve_digits() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_in(dir.path(), &["generate", "random", "--n", "3", "--out", "f.json"]).status.success());
    let out = run_in(dir.path(), &["feasible", "f.json", "--power", "mean", "--p", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("feasible="), "{text}");
    assert!(text.contains("margin="), "{text}");
    // 12 significant digits = 11 decimals in scientific notation
    let margin = text.split("margin=").nth(1).unwrap().split_whitespace().next().unwrap();
    assert!(margin.contains('e') && margin.split(['.', 'e']).nth(1).unwrap().len() == 11, "{margin}");
}

#[test]
fn calibrate_writes_and_reuses_cache() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["calibrate", "--m", "1", "--delta", "0.9", "--tau", "0.8", "--trials", "8"];
    let first = run_in(dir.path(), &args);
    assert!(first.status.success());
    let gamma_line = stdout(&first);
    assert!(gamma_line.starts_with("gamma="));
    assert!(dir.path().join("gamma-cache.json").exists());
    let second = run_in(dir.path(), &args);
    assert_eq!(stdout(&second), gamma_line);
}

#[test]
fn experiment_sweep_rows_and_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let config = serde_json::json!({
        "instances": [
            {"generator": "firstfit-tree", "k": 5},
            {"generator": "firstfit-tree", "k": 6},
            {"generator": "firstfit-tree", "k": 7},
        ],
        "algorithms": [
            {"algo": "first-fit", "tau": 0.0},
            {"algo": "conflict", "gamma": 1.5, "delta": 0.9, "tau": 0.8},
            {"algo": "capacity", "gamma": 1.5, "delta": 0.9, "tau": 0.8},
        ],
        "seeds": [1],
        "out": "sweep.csv",
    });
    std::fs::write(dir.path().join("cfg.json"), config.to_string()).unwrap();
    let out = run_in(dir.path(), &["experiment", "--config", "cfg.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "instance,n,delta,algorithm,params,slots,weight,verified,flags,ms,seed");
    assert_eq!(lines.len(), 1 + 3 * 3, "{text}");
    // capacity rows fill the weight column, schedule rows fill slots
    for line in &lines[1..] {
        let cols: Vec<&str> = line.split(',').collect();
        if cols[3] == "capacity" {
            assert!(cols[5].is_empty() && !cols[6].is_empty(), "{line}");
        } else {
            assert!(!cols[5].is_empty() && cols[6].is_empty(), "{line}");
        }
    }
    // the first-fit/conflict slot ratio is non-decreasing in k
    let slots = |k: usize, algo: &str| -> f64 {
        lines
            .iter()
            .find(|l| l.starts_with(&format!("firstfit-tree:k={k},")) && l.contains(algo))
            .and_then(|l| l.split(',').nth(5))
            .and_then(|s| s.parse::<f64>().ok())
            .unwrap()
    };
    let ratios: Vec<f64> = (5..=7).map(|k| slots(k, "first-fit") / slots(k, "conflict")).collect();
    assert!(ratios.windows(2).all(|w| w[1] >= w[0]), "{ratios:?}");

    // rerun is byte-identical
    let before = std::fs::read(dir.path().join("sweep.csv")).unwrap();
    assert!(run_in(dir.path(), &["experiment", "--config", "cfg.json"]).status.success());
    let after = std::fs::read(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(before, after);
}

#[test]
fn experiment_requires_instances_and_algorithms() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.json"),
        serde_json::json!({"instances": [], "algorithms": []}).to_string(),
    )
    .unwrap();
    let out = run_in(dir.path(), &["experiment", "--config", "cfg.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_version_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.json"),
        r#"{"version":9,"metric":{"type":"euclidean","dim":1},"points":[],"params":{"alpha":3.0,"beta":1.0,"noise":0.0},"links":[]}"#,
    )
    .unwrap();
    let out = run_in(dir.path(), &["schedule", "bad.json", "--algo", "first-fit"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn weaken_round_trip_via_files() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_in(
        dir.path(),
        &["generate", "random", "--n", "6", "--noise", "0.25", "--beta", "1.5", "--out", "src.json"]
    )
    .status
    .success());
    let out = run_in(
        dir.path(),
        &["generate", "weaken", "--input", "src.json", "--p-max", "50000", "--tau", "0.5", "--out", "weak.json"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let weak = Instance::load(&dir.path().join("weak.json")).unwrap();
    assert_eq!(weak.n(), 6);
}
