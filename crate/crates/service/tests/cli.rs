use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sam_prior::report::to_json;
use sam_prior::{analyze, AnalyzeConfig};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn sam_prior(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sam-prior")).args(args).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn analyze_prints_the_library_report() {
    let path = fixture("application.json");
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let out = sam_prior(&["analyze", "--config", path.to_str().unwrap(), "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));

    let config = AnalyzeConfig::from_json(&fs::read_to_string(&path).unwrap()).unwrap();
    let golden = to_json(&analyze(&config).unwrap()).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden);
    assert_eq!(fs::read_to_string(&out_path).unwrap(), golden);

    let report: serde_json::Value = serde_json::from_str(&golden).unwrap();
    assert_eq!(report["results"].as_array().unwrap().len(), 4);
    assert_eq!(report["results"][0]["control_posterior"], report["results"][3]["control_posterior"]);
    assert!(report["software_version"].is_string());
}

#[test]
fn analyze_overrides_apply() {
    let path = fixture("application.json");
    let out = sam_prior(&["analyze", "--config", path.to_str().unwrap(), "--cutoff", "0.5", "--delta", "0.1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["results"][0]["decision"]["cutoff"], 0.5);
}

#[test]
fn malformed_json_exits_2() {
    let path = fixture("malformed.json");
    for cmd in ["analyze", "calibrate", "simulate", "curve"] {
        let out = sam_prior(&[cmd, "--config", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{cmd}: {}", stderr(&out));
    }
}

#[test]
fn missing_config_exits_2() {
    let out = sam_prior(&["simulate", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cannot read"));
}

#[test]
fn schema_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let text = fs::read_to_string(fixture("small_batch.json")).unwrap().replace("\"n_h\": 300, \"theta\": 0.4, \"n\": 150, \"theta_t\": 0.5", "\"n_h\": 300, \"theta\": 0.4, \"n\": \"many\", \"theta_t\": 0.5");
    fs::write(&path, text).unwrap();
    let out = sam_prior(&["calibrate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("scenarios[1].n"), "{}", stderr(&out));
}

#[test]
fn unsupported_method_names_the_non_goal() {
    let path = fixture("unsupported.json");
    let out = sam_prior(&["simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("unsupported method `cp`"), "{err}");
    assert!(err.contains("non-goal"), "{err}");
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (String, String) {
    let out_path = dir.join(name);
    let mut full = args.to_vec();
    full.extend(["--quiet", "--out", out_path.to_str().unwrap()]);
    let out = sam_prior(&full);
    assert!(out.status.success(), "{}", stderr(&out));
    (
        fs::read_to_string(out_path.with_extension("csv")).unwrap(),
        fs::read_to_string(out_path.with_extension("json")).unwrap(),
    )
}

#[test]
fn one_replicate_runs_are_repeatable() {
    let config = fixture("small_batch.json");
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate", "--config", config.to_str().unwrap(), "--replicates", "1", "--seed", "7"];
    let a = run_to(dir.path(), "a", &args);
    let b = run_to(dir.path(), "b", &args);
    assert_eq!(a, b);
    let json: serde_json::Value = serde_json::from_str(&a.1).unwrap();
    assert_eq!(json["replicates"], 1);
    assert_eq!(json["seed"], 7);
}

#[test]
fn thread_count_does_not_change_output() {
    let config = fixture("small_batch.json");
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["calibrate", "simulate", "curve"] {
        let config = if cmd == "curve" { fixture("curve.json") } else { config.clone() };
        let base = ["--config", config.to_str().unwrap()];
        let one = run_to(dir.path(), &format!("{cmd}1"), &[&[cmd][..], &base, &["--threads", "1"]].concat());
        let eight = run_to(dir.path(), &format!("{cmd}8"), &[&[cmd][..], &base, &["--threads", "8"]].concat());
        assert_eq!(one, eight, "{cmd}");
    }
}

#[test]
fn simulate_csv_has_the_published_columns() {
    let config = fixture("small_batch.json");
    let dir = tempfile::tempdir().unwrap();
    let (csv, json) = run_to(dir.path(), "oc", &["simulate", "--config", config.to_str().unwrap()]);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scenario_label,method,cutoff,rejection_rate,bias,mse,relative_bias,relative_mse,mean_weight,replicates,seed"
    );
    // two scenarios x (sam, mix50); the internal NP reference is not reported
    assert_eq!(lines.count(), 4);
    let json: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(json["results"].as_array().unwrap().len(), 4);
    assert_eq!(json["calibration_replicates"], 1000);
}

#[test]
fn trace_writes_one_line_per_decision() {
    let config = fixture("small_batch.json");
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    run_to(
        dir.path(),
        "oc",
        &["simulate", "--config", config.to_str().unwrap(), "--replicates", "5", "--trace", trace.to_str().unwrap()],
    );
    let lines: Vec<serde_json::Value> =
        fs::read_to_string(&trace).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2 * 2 * 5);
    assert!(lines.iter().all(|l| l["decision"]["prob_superiority"].is_number()));
}

#[test]
fn progress_goes_to_stderr() {
    let config = fixture("small_batch.json");
    let out = sam_prior(&["calibrate", "--config", config.to_str().unwrap(), "--replicates", "1000"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("progress: 100.0% (2000/2000)"), "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["calibrations"].as_array().unwrap().len(), 2);
}
