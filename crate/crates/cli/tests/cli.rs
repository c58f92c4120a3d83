use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;

fn ope(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ope")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_instance(dir: &Path, name: &str, behavior: &[f64], var: f64) -> String {
    let k = behavior.len();
    let target: Vec<f64> = (1..=k).map(|a| a as f64 / (k * (k + 1) / 2) as f64).collect();
    let rewards: Vec<Value> = (1..=k)
        .map(|a| serde_json::json!({"kind": "normal", "mean": a as f64 / k as f64, "var": var}))
        .collect();
    let body = serde_json::json!({"K": k, "behavior": behavior, "target": target, "rewards": rewards});
    let path = dir.join(name);
    fs::write(&path, body.to_string()).unwrap();
    path.to_string_lossy().into_owned()
}

fn figure_instance(dir: &Path) -> String {
    let w: Vec<f64> = (1..=10).map(|a| a as f64 / 55.0).collect();
    write_instance(dir, "fig.json", &w, 0.01)
}

#[test]
fn analytic_reports_every_field() {
    let dir = tempfile::tempdir().unwrap();
    let inst = figure_instance(dir.path());
    let out = ope(&["analytic", "--instance", &inst, "-n", "100"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    for field in [
        "v1",
        "v2",
        "p_missing",
        "v0n",
        "v3n",
        "bias_bn",
        "lr_mse",
        "reg_mse_upper",
        "reg_mse_lower_normal",
        "minimax_lower",
        "best_subset",
        "subset_search_heuristic",
    ] {
        assert!(report.get(field).is_some(), "missing {field}");
    }
    assert!((report["v1"].as_f64().unwrap() - 0.01).abs() < 1e-12);
}

#[test]
fn analytic_rejects_unidentifiable_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "bad.json", &[0.5, 0.5, 0.0], 0.1);
    let out = ope(&["analytic", "--instance", &inst, "-n", "10"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("action 2"));
}

#[test]
fn analytic_noiseless_has_zero_v1() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "flat.json", &[0.25, 0.25, 0.5], 0.0);
    let out = ope(&["analytic", "--instance", &inst, "-n", "5"]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["v1"].as_f64().unwrap(), 0.0);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let garbage = dir.path().join("garbage.json");
    fs::write(&garbage, "{not json").unwrap();
    assert_eq!(code(&ope(&["analytic", "--instance", garbage.to_str().unwrap(), "-n", "3"])), 2);
    assert_eq!(code(&ope(&["analytic", "--instance", "/nonexistent/x.json", "-n", "3"])), 2);
    let unnormalized = dir.path().join("sum.json");
    fs::write(
        &unnormalized,
        r#"{"K": 2, "behavior": [0.5, 0.6], "target": [0.5, 0.5], "rewards": [{"kind": "point", "value": 1}, {"kind": "point", "value": 0}]}"#,
    )
    .unwrap();
    assert_eq!(code(&ope(&["analytic", "--instance", unnormalized.to_str().unwrap(), "-n", "3"])), 2);
    assert_eq!(code(&ope(&["figure", "nonsense", "--out", dir.path().to_str().unwrap()])), 2);
}

#[test]
fn simulate_is_reproducible_and_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let inst = figure_instance(dir.path());
    let cfg = dir.path().join("mc.json");
    fs::write(&cfg, r#"{"sample_sizes": [10, 100, 1000], "replications": 100, "seed": 3}"#).unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let start = Instant::now();
    for (path, threads) in [(&a, "1"), (&b, "2")] {
        let out = ope(&[
            "simulate",
            "--instance",
            &inst,
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            path.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert!(start.elapsed().as_secs_f64() < 10.0);
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert_eq!(
        text.lines().next().unwrap(),
        "experiment,instance_id,estimator,n,replications,mse,nmse,stderr,seed"
    );
    assert_eq!(text.lines().count(), 1 + 3 * 2);
    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "simulate");
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);
}

#[test]
fn simulate_without_config_file_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let inst = figure_instance(dir.path());
    let out = ope(&[
        "simulate",
        "--instance",
        &inst,
        "--config",
        "/nonexistent/mc.json",
        "--out",
        dir.path().join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"sample_sizes": [10], "replications": 1}"#).unwrap();
    let out = ope(&[
        "simulate",
        "--instance",
        &inst,
        "--config",
        bad.to_str().unwrap(),
        "--out",
        dir.path().join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn figure_bundles_have_canonical_names_and_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str, extra: &[&str]| {
        let out_dir = dir.path().join(sub);
        let mut args = vec!["figure", sub, "--out", out_dir.to_str().unwrap(), "--replications", "20"];
        args.extend_from_slice(extra);
        let out = ope(&args);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        out_dir
    };
    let left = run("comparison", &[]);
    let right = run("kscaling", &["--ks", "5,10"]);
    let left_csv = fs::read_to_string(left.join("fig1_left.csv")).unwrap();
    let right_csv = fs::read_to_string(right.join("fig1_right.csv")).unwrap();
    for csv in [&left_csv, &right_csv] {
        assert!(csv.starts_with("experiment,instance_id,estimator,n,replications,mse,nmse,stderr,seed\n"));
    }
    assert_eq!(left_csv.lines().count(), 1 + 3 * 10 * 2);
    assert!(right_csv.lines().skip(1).all(|l| l.starts_with("kscaling,k")));
    assert!(left.join("fig1_left.csv.manifest.json").exists());
    assert!(right.join("fig1_right_reference.json").exists());
    // rerun into a fresh directory
    let again = dir.path().join("again");
    let out = ope(&["figure", "comparison", "--out", again.to_str().unwrap(), "--replications", "20"]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read_to_string(again.join("fig1_left.csv")).unwrap(), left_csv);
}

#[test]
fn verify_reports_every_suite() {
    let out = ope(&["verify", "--instances", "8"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let suites = report["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 10);
    assert!(suites.iter().all(|s| s["status"] == "pass"));

    let out = ope(&["verify", "fisher_identity", "--instances", "5"]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let suites = report["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 10);
    assert_eq!(suites.iter().filter(|s| s["status"] == "skipped").count(), 9);

    assert_eq!(code(&ope(&["verify", "no_such_suite"])), 2);
}

#[test]
fn locks_writes_a_loadable_mdp() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lock.json");
    let out = ope(&["locks", "--states", "5", "--p-left", "0.25", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let mdp: ope_core::MdpInstance = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(mdp.num_states(), 5);
    assert_eq!(mdp.horizon(), 4);
    assert_eq!(mdp.target_value(), 1.0);
    assert!(dir.path().join("lock.json.manifest.json").exists());
    assert_eq!(code(&ope(&["locks", "--states", "5", "--p-left", "1.5"])), 2);
}
