//! CSV and JSON writers for simulation, calibration and weight-curve output.
//!
//! Floats are written in their shortest round-trip form, so identical results
//! always produce identical bytes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::simulation::{CalibrationResult, OcMetrics, WeightPoint};

pub const OC_COLUMNS: [&str; 11] = [
    "scenario_label",
    "method",
    "cutoff",
    "rejection_rate",
    "bias",
    "mse",
    "relative_bias",
    "relative_mse",
    "mean_weight",
    "replicates",
    "seed",
];

pub const CALIBRATION_COLUMNS: [&str; 6] = ["scenario_label", "method", "cutoff", "alpha_target", "replicates", "seed"];

pub const CURVE_COLUMNS: [&str; 2] = ["theta", "mean_w"];

fn write_csv<const N: usize>(header: [&str; N], rows: impl Iterator<Item = [String; N]>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::domain(format!("csv: {e}"));
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::domain(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn oc_csv(metrics: &[OcMetrics]) -> Result<String> {
    write_csv(
        OC_COLUMNS,
        metrics.iter().map(|m| {
            [
                m.scenario_label.clone(),
                m.method_label.clone(),
                m.cutoff.to_string(),
                m.rejection_rate.to_string(),
                m.bias.to_string(),
                m.mse.to_string(),
                m.relative_bias.to_string(),
                m.relative_mse.to_string(),
                m.mean_weight.map(|w| w.to_string()).unwrap_or_default(),
                m.replicates.to_string(),
                m.seed.to_string(),
            ]
        }),
    )
}

pub fn calibration_csv(results: &[CalibrationResult]) -> Result<String> {
    write_csv(
        CALIBRATION_COLUMNS,
        results.iter().map(|c| {
            [
                c.scenario_label.clone(),
                c.method_label.clone(),
                c.cutoff.to_string(),
                c.alpha_target.to_string(),
                c.replicates.to_string(),
                c.seed.to_string(),
            ]
        }),
    )
}

pub fn curve_csv(points: &[WeightPoint]) -> Result<String> {
    write_csv(CURVE_COLUMNS, points.iter().map(|p| [p.theta.to_string(), p.mean_w.to_string()]))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::domain(format!("json: {e}")))?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comparators::MethodSpec;

    fn metric(label: &str, weight: Option<f64>) -> OcMetrics {
        OcMetrics {
            scenario_label: label.into(),
            method: MethodSpec::Sam,
            method_label: "SAM".into(),
            cutoff: 0.9731,
            rejection_rate: 0.862,
            bias: -0.001,
            mse: 0.0012,
            mean_weight: weight,
            relative_bias: 0.0001,
            relative_mse: -0.0003,
            replicates: 2000,
            seed: 2023,
            data_digest: "00".into(),
        }
    }

    #[test]
    fn oc_layout() {
        let csv = oc_csv(&[metric("1.2", Some(0.75)), metric("a, b", None)]).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], OC_COLUMNS.join(","));
        assert_eq!(lines[1], "1.2,SAM,0.9731,0.862,-0.001,0.0012,0.0001,-0.0003,0.75,2000,2023");
        assert_eq!(lines[2], "\"a, b\",SAM,0.9731,0.862,-0.001,0.0012,0.0001,-0.0003,,2000,2023");
    }

    #[test]
    fn floats_round_trip() {
        let x = 0.1 + 0.2;
        let csv = curve_csv(&[WeightPoint { theta: x, mean_w: 1.0 / 3.0 }]).unwrap();
        let row = csv.lines().nth(1).unwrap();
        let parsed: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(parsed, vec![x, 1.0 / 3.0]);
    }
}
