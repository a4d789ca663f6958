use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn model_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/models/ttbs.json")
}

fn archopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_archopt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: {}\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn model() -> String {
    model_path().display().to_string()
}

#[test]
fn validate_accepts_the_fixture() {
    let out = archopt(&["validate", &model()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["valid"], true);
}

#[test]
fn validate_reports_violations_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut m: Value = serde_json::from_str(&fs::read_to_string(model_path()).unwrap()).unwrap();
    m["nodes"][0]["deployed"] = serde_json::json!(["no-such-component"]);
    let path = dir.path().join("bad.json");
    fs::write(&path, m.to_string()).unwrap();
    let out = archopt(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["valid"], false);
    assert!(!report["violations"].as_array().unwrap().is_empty());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(archopt(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(archopt(&["validate"]).status.code(), Some(2));
}

#[test]
fn missing_file_exits_one() {
    let out = archopt(&["reliability", "/nonexistent/model.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn analysis_commands_print_json() {
    let solved = stdout_json(&archopt(&["solve-lqn", &model()]));
    assert_eq!(solved["chains"].as_array().unwrap().len(), 3);
    assert_eq!(solved["converged"], true);

    let rel = stdout_json(&archopt(&["reliability", &model()]));
    let r = rel["reliability"].as_f64().unwrap();
    assert!(r > 0.0 && r < 1.0);

    let pas = stdout_json(&archopt(&["detect", &model(), "--fuzziness", "0.95"]));
    assert!(pas["count"].as_u64().is_some());
    let crisp = stdout_json(&archopt(&["detect", &model(), "--deterministic"]));
    assert!(crisp["instances"].is_array());
}

#[test]
fn dump_lqn_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = archopt(&[
        "solve-lqn",
        &model(),
        "--dump-lqn",
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let files: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(files.len(), 1);
}

#[test]
fn apply_and_evaluate_a_sequence() {
    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("seq.json");
    fs::write(&seq, r#"[{"kind":"CloneNode","target":"n-travel"},{"kind":"DeployCompNewNode","target":"ts-rebook"}]"#)
        .unwrap();
    let out = archopt(&["apply", &model(), seq.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let refactored = dir.path().join("refactored.json");
    fs::write(&refactored, &out.stdout).unwrap();
    assert_eq!(
        archopt(&["validate", refactored.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let m = stdout_json(&out);
    assert_eq!(m["nodes"].as_array().unwrap().len(), 13);

    let obj = stdout_json(&archopt(&["evaluate", &model(), seq.to_str().unwrap()]));
    for key in ["perfq", "reliability", "n_pas", "arch_dist"] {
        assert!(obj[key].as_f64().unwrap().is_finite(), "{key}");
    }
    let no_pas = stdout_json(&archopt(&[
        "evaluate",
        &model(),
        seq.to_str().unwrap(),
        "--no-pas",
    ]));
    assert_eq!(no_pas["n_pas"].as_f64(), Some(0.0));
    assert_eq!(no_pas["perfq"], obj["perfq"]);
}

#[test]
fn infeasible_sequence_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("seq.json");
    fs::write(&seq, r#"[{"kind":"CloneNode","target":"n-missing"}]"#).unwrap();
    assert_eq!(
        archopt(&["apply", &model(), seq.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn optimize_report_and_rpf() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("results");
    let out = archopt(&[
        "optimize",
        &model(),
        "--generations",
        "3",
        "--population",
        "6",
        "--runs",
        "2",
        "--fuzziness",
        "0.9",
        "--no-pas",
        "--seed",
        "11",
        "--threads",
        "2",
        "--output",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let manifest = stdout_json(&out);
    assert_eq!(manifest["complete"], true);
    assert!(!out_dir.join(".incomplete").exists());
    for variant in ["pas-0.9", "no-pas"] {
        for run in ["run-0", "run-1"] {
            for file in ["pareto.csv", "stats.csv", "config.json"] {
                assert!(
                    out_dir.join(variant).join(run).join(file).is_file(),
                    "{variant}/{run}/{file}"
                );
            }
        }
        let config: Value = serde_json::from_str(
            &fs::read_to_string(out_dir.join(variant).join("run-1/config.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(config["seed"], 12);
    }

    let out = archopt(&["report", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(
        text.contains("pas-0.9") && text.contains("no-pas"),
        "{text}"
    );
    assert!(out_dir.join("report.csv").is_file());

    let merged = dir.path().join("merged.csv");
    let out = archopt(&[
        "rpf",
        out_dir.join("no-pas").to_str().unwrap(),
        out_dir.join("pas-0.9/run-0/pareto.csv").to_str().unwrap(),
        "--output",
        merged.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(&merged).unwrap();
    assert!(csv.starts_with("perfq,reliability,n_pas,arch_dist,sequence"));
    assert!(csv.lines().count() > 1);
}

#[test]
fn optimize_from_spec_resolves_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(model_path(), dir.path().join("m.json")).unwrap();
    let spec = serde_json::json!({
        "model": "m.json",
        "output": "out",
        "variants": [{ "name": "quick", "config": { "generations": 2, "population_size": 4, "runs": 1 } }]
    });
    let spec_path = dir.path().join("spec.json");
    fs::write(&spec_path, spec.to_string()).unwrap();
    let out = archopt(&["optimize", "--spec", spec_path.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("out/quick/run-0/pareto.csv").is_file());
    assert!(dir.path().join("out/manifest.json").is_file());
}

#[test]
fn report_on_empty_directory_fails() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        archopt(&["report", dir.path().to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}
