//! JSON and CSV shapes consumed by the browser client and other tools.

use std::collections::BTreeSet;

use sam_prior::batch::{curve, CurveConfig};
use sam_prior::report::{calibration_csv, curve_csv, oc_csv, to_json, CALIBRATION_COLUMNS, CURVE_COLUMNS, OC_COLUMNS};
use sam_prior::{analyze, calibrate_batch, simulate_batch, AnalyzeConfig, BatchConfig, Engine, MethodSpec, ScenarioSpec};
use serde_json::{json, Value};

const BATCH: &str = r#"{
    "scenarios": [
        {"label": "null", "endpoint": "binary", "theta_h": 0.4, "n_h": 300, "theta": 0.4, "n": 150, "theta_t": 0.4, "n_t": 300, "delta": 0.1},
        {"label": "alt", "endpoint": "binary", "theta_h": 0.4, "n_h": 300, "theta": 0.4, "n": 150, "theta_t": 0.5, "n_t": 300, "delta": 0.1,
         "methods": [{"kind": "sam"}, {"kind": "pp", "gamma_grid": 51}]}
    ],
    "methods": [{"kind": "sam"}, {"kind": "mix", "w_tilde": 0.5}],
    "calibration_replicates": 1000,
    "replicates": 30,
    "seed": 4
}"#;

fn keys(v: &Value) -> BTreeSet<&str> {
    v.as_object().unwrap().keys().map(String::as_str).collect()
}

fn set<'a>(items: &[&'a str]) -> BTreeSet<&'a str> {
    items.iter().copied().collect()
}

#[test]
fn simulation_report_shape() {
    let cfg = BatchConfig::from_json(BATCH).unwrap();
    let report = simulate_batch(&Engine::new(), &cfg).unwrap();
    let v: Value = serde_json::from_str(&to_json(&report).unwrap()).unwrap();
    assert_eq!(
        keys(&v),
        set(&["software_version", "seed", "replicates", "alpha", "calibration_replicates", "calibrations", "results"])
    );
    assert_eq!((v["seed"].as_u64(), v["replicates"].as_u64()), (Some(4), Some(30)));

    let methods: Vec<(&str, &str)> =
        v["results"].as_array().unwrap().iter().map(|r| (r["scenario_label"].as_str().unwrap(), r["method_label"].as_str().unwrap())).collect();
    assert_eq!(methods, [("null", "SAM"), ("null", "Mix50"), ("alt", "SAM"), ("alt", "PP")]);

    let row = &v["results"][0];
    for column in OC_COLUMNS {
        assert!(row.get(column).is_some(), "missing {column}");
    }
    assert!(row["data_digest"].as_str().unwrap().len() == 16);
    assert!(v["results"][1]["mean_weight"].as_f64().is_some());
    assert!(v["results"][3]["mean_weight"].is_null());

    let cal = &v["calibrations"][0];
    for column in CALIBRATION_COLUMNS {
        assert!(cal.get(column).is_some(), "missing {column}");
    }
}

#[test]
fn csv_headers_and_empty_cells() {
    let cfg = BatchConfig::from_json(BATCH).unwrap();
    let report = simulate_batch(&Engine::new(), &cfg).unwrap();
    let csv = oc_csv(&report.results).unwrap();
    let mut rows = csv::Reader::from_reader(csv.as_bytes());
    assert_eq!(rows.headers().unwrap().iter().collect::<Vec<_>>(), OC_COLUMNS);
    let records: Vec<csv::StringRecord> = rows.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 4);
    assert_eq!(&records[3][1], "PP");
    assert_eq!(&records[3][8], "");
    for r in &records {
        let rate: f64 = r[3].parse().unwrap();
        assert!((0.0..=1.0).contains(&rate));
    }
    // floats survive a text round trip
    let back: f64 = records[0][2].parse().unwrap();
    assert_eq!(back, report.results[0].cutoff);

    let cal = calibrate_batch(&Engine::new(), &cfg).unwrap();
    let text = calibration_csv(&cal.calibrations).unwrap();
    assert_eq!(text.lines().next().unwrap(), CALIBRATION_COLUMNS.join(","));
    assert_eq!(text.lines().count(), 1 + cal.calibrations.len());
}

#[test]
fn curve_report_shape() {
    let scenario: ScenarioSpec = serde_json::from_value(json!({
        "label": "c", "endpoint": "normal", "theta_h": 0.0, "n_h": 60, "sigma": 3.0,
        "theta": 0.0, "n": 30, "theta_t": 0.0, "n_t": 60, "delta": 1.5
    }))
    .unwrap();
    let mut cfg = CurveConfig::new(scenario);
    cfg.replicates = 20;
    cfg.seed = 8;
    let report = curve(&Engine::new(), &cfg).unwrap();
    let v: Value = serde_json::from_str(&to_json(&report).unwrap()).unwrap();
    assert_eq!(keys(&v), set(&["software_version", "seed", "replicates", "scenario_label", "points"]));
    assert_eq!(v["points"].as_array().unwrap().len(), 21);
    assert_eq!(keys(&v["points"][0]), set(&["theta", "mean_w"]));
    let text = curve_csv(&report.points).unwrap();
    assert_eq!(text.lines().next().unwrap(), CURVE_COLUMNS.join(","));
}

#[test]
fn analysis_report_shape() {
    let cfg = AnalyzeConfig::from_value(json!({
        "endpoint": "normal",
        "historical": {"n": 60, "mean": 0.0, "sd": 3.0},
        "delta": 1.5,
        "control": {"n": 30, "mean": 0.4, "sd": 2.8},
        "treatment": {"n": 60, "mean": 1.6, "sd": 3.1},
        "methods": [{"kind": "sam"}, {"kind": "np"}],
        "cutoff": 0.95
    }))
    .unwrap();
    let v: Value = serde_json::to_value(analyze(&cfg).unwrap()).unwrap();
    for k in ["software_version", "seed", "replicates", "label", "informative_prior", "vague", "sam_weight", "results"] {
        assert!(v.get(k).is_some(), "missing {k}");
    }
    assert_eq!(keys(&v["sam_weight"]), set(&["log_r", "w", "theta_h_hat", "delta", "side_used"]));
    assert_eq!(v["informative_prior"]["family"], "normal");
    let sam = &v["results"][0];
    assert_eq!(sam["method"], json!({"kind": "sam"}));
    assert_eq!(sam["decision"]["cutoff"], 0.95);
    assert!(sam["decision"]["reject"].is_boolean());
    assert_eq!(sam["control_posterior"]["components"].as_array().unwrap().len(), 2);
}

#[test]
fn method_specs_round_trip() {
    for m in [MethodSpec::Np, MethodSpec::Sam, MethodSpec::mix(0.9), MethodSpec::power_prior()] {
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<MethodSpec>(&text).unwrap(), m);
    }
}
