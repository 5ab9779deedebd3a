//! The operations behind both the CLI subcommands and the HTTP endpoints, so
//! the two front ends produce byte-identical payloads.

use sam_prior::batch::{self, BatchConfig, CalibrationReport, CurveConfig, CurveReport, SimulationReport};
use sam_prior::report::{calibration_csv, curve_csv, oc_csv, to_json};
use sam_prior::simulation::TraceRecord;
use sam_prior::{analyze, AnalyzeConfig, Engine, Result};
use serde_json::Value;

/// Command-line overrides for `analyze`.
#[derive(Debug, Clone, Copy, Default)]
pub struct AnalyzeOverrides {
    pub cutoff: Option<f64>,
    pub delta: Option<f64>,
}

/// Command-line overrides for batch and curve runs.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOverrides {
    pub seed: Option<u64>,
    pub replicates: Option<u64>,
}

pub fn analyze_config(value: Value, overrides: AnalyzeOverrides) -> Result<AnalyzeConfig> {
    let mut config = AnalyzeConfig::from_value(value)?;
    if let Some(c) = overrides.cutoff {
        config.cutoff = Some(c);
    }
    if let Some(d) = overrides.delta {
        config.delta = d;
    }
    Ok(config)
}

pub fn analyze_json(config: &AnalyzeConfig) -> Result<String> {
    to_json(&analyze(config)?)
}

/// Parses a batch config. For calibration runs `--replicates` sets the
/// calibration replicate count; otherwise it sets the reporting count.
pub fn batch_config(value: Value, overrides: RunOverrides, calibrating: bool) -> Result<BatchConfig> {
    let mut config = BatchConfig::from_value(value)?;
    if let Some(s) = overrides.seed {
        config.seed = s;
    }
    if let Some(r) = overrides.replicates {
        if calibrating {
            config.calibration_replicates = r;
        } else {
            config.replicates = r;
        }
    }
    config.validate()?;
    Ok(config)
}

pub fn curve_config(value: Value, overrides: RunOverrides) -> Result<CurveConfig> {
    let mut config = CurveConfig::from_value(value)?;
    if let Some(s) = overrides.seed {
        config.seed = s;
    }
    if let Some(r) = overrides.replicates {
        config.replicates = r;
    }
    config.validate()?;
    Ok(config)
}

/// A finished run: the JSON mirror and the CSV table.
pub struct Rendered {
    pub json: String,
    pub csv: String,
}

pub fn render_calibration(report: &CalibrationReport) -> Result<Rendered> {
    Ok(Rendered {
        json: to_json(report)?,
        csv: calibration_csv(&report.calibrations)?,
    })
}

pub fn render_simulation(report: &SimulationReport) -> Result<Rendered> {
    Ok(Rendered {
        json: to_json(report)?,
        csv: oc_csv(&report.results)?,
    })
}

pub fn render_curve(report: &CurveReport) -> Result<Rendered> {
    Ok(Rendered {
        json: to_json(report)?,
        csv: curve_csv(&report.points)?,
    })
}

pub fn calibrate(engine: &Engine, config: &BatchConfig) -> Result<Rendered> {
    render_calibration(&batch::calibrate_batch(engine, config)?)
}

pub fn simulate(engine: &Engine, config: &BatchConfig) -> Result<Rendered> {
    render_simulation(&batch::simulate_batch(engine, config)?)
}

pub fn simulate_traced(engine: &Engine, config: &BatchConfig) -> Result<(Rendered, Vec<TraceRecord>)> {
    let (report, trace) = batch::simulate_batch_traced(engine, config)?;
    Ok((render_simulation(&report)?, trace))
}

pub fn curve(engine: &Engine, config: &CurveConfig) -> Result<Rendered> {
    render_curve(&batch::curve(engine, config)?)
}
