//! Batch runs over many scenarios: per-design cutoff calibration followed by
//! operating-characteristics runs, plus weight-curve jobs.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::comparators::MethodSpec;
use crate::config::{self, at};
use crate::error::{Error, Result};
use crate::simulation::{CalibrationResult, Endpoint, Engine, OcMetrics, ScenarioSpec, TraceRecord, WeightPoint, MIN_CALIBRATION_REPLICATES};
use crate::VERSION;

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_CALIBRATION_REPLICATES: u64 = 10_000;
pub const DEFAULT_REPLICATES: u64 = 2000;
pub const DEFAULT_CURVE_POINTS: usize = 21;

fn default_methods() -> Vec<MethodSpec> {
    vec![MethodSpec::Np, MethodSpec::Sam, MethodSpec::mix(0.5), MethodSpec::power_prior()]
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn default_calibration_replicates() -> u64 {
    DEFAULT_CALIBRATION_REPLICATES
}

fn default_replicates() -> u64 {
    DEFAULT_REPLICATES
}

/// A scenario batch. On disk either a bare array of scenarios or an object
/// with `scenarios` and run settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchConfig {
    pub scenarios: Vec<ScenarioSpec>,
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodSpec>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_calibration_replicates")]
    pub calibration_replicates: u64,
    #[serde(default = "default_replicates")]
    pub replicates: u64,
    #[serde(default)]
    pub seed: u64,
    /// Fixed cutoffs, one per method; skips calibration when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoffs: Option<Vec<f64>>,
}

impl BatchConfig {
    pub fn new(scenarios: Vec<ScenarioSpec>) -> Self {
        Self {
            scenarios,
            methods: default_methods(),
            alpha: DEFAULT_ALPHA,
            calibration_replicates: DEFAULT_CALIBRATION_REPLICATES,
            replicates: DEFAULT_REPLICATES,
            seed: 0,
            cutoffs: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_value(config::parse_value(text)?)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let cfg = match value {
            Value::Array(_) => Self::new(config::from_value(value)?),
            other => config::from_value(other)?,
        };
        Ok(cfg)
    }

    /// Checks every scenario and method; errors carry the offending path.
    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() {
            return Err(Error::config("scenarios", "at least one scenario is required"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config("alpha", "must lie in (0, 1)"));
        }
        if self.replicates == 0 {
            return Err(Error::config("replicates", "must be at least 1"));
        }
        if self.cutoffs.is_none() && self.calibration_replicates < MIN_CALIBRATION_REPLICATES {
            return Err(Error::config(
                "calibration_replicates",
                format!("must be at least {MIN_CALIBRATION_REPLICATES}"),
            ));
        }
        if self.methods.is_empty() {
            return Err(Error::config("methods", "at least one method is required"));
        }
        if let Some(cutoffs) = &self.cutoffs {
            if cutoffs.len() != self.methods.len() {
                return Err(Error::config("cutoffs", "one cutoff per method is required"));
            }
            if self.scenarios.iter().any(|s| s.methods.is_some()) {
                return Err(Error::config("cutoffs", "fixed cutoffs cannot be combined with per-scenario methods"));
            }
        }
        for (i, s) in self.scenarios.iter().enumerate() {
            let path = format!("scenarios[{i}]");
            let prepared = s.prepare().map_err(|e| at(&path, e))?;
            for m in self.methods_for(s) {
                prepared.check_method(m).map_err(|e| at(&path, e))?;
            }
            if self.cutoffs.is_none() {
                s.null_scenario().and_then(|n| n.prepare()).map_err(|e| at(&path, e))?;
            }
        }
        Ok(())
    }

    pub fn methods_for<'a>(&'a self, scenario: &'a ScenarioSpec) -> &'a [MethodSpec] {
        scenario.methods.as_deref().unwrap_or(&self.methods)
    }

    /// Number of progress ticks [`calibrate_batch`] emits.
    pub fn calibration_work(&self) -> Result<u64> {
        let mut designs = HashSet::new();
        let mut total = 0;
        for s in &self.scenarios {
            let key = design_key(&s.null_scenario()?)?;
            for m in self.methods_for(s) {
                if designs.insert(format!("{key}|{}", method_key(m))) {
                    total += self.calibration_replicates;
                }
            }
        }
        Ok(total)
    }

    /// Number of progress ticks [`simulate_batch`] emits.
    pub fn simulation_work(&self) -> Result<u64> {
        let calibration = if self.cutoffs.is_some() { 0 } else { self.calibration_work()? };
        Ok(calibration + self.replicates * self.scenarios.len() as u64)
    }
}

/// Identifies a calibration design: the null scenario minus its label.
fn design_key(null: &ScenarioSpec) -> Result<String> {
    let mut keyed = null.clone();
    keyed.label.clear();
    keyed.methods = None;
    serde_json::to_string(&keyed).map_err(|e| Error::domain(e.to_string()))
}

fn method_key(m: &MethodSpec) -> String {
    serde_json::to_string(m).expect("method specs serialize")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub software_version: String,
    pub seed: u64,
    pub replicates: u64,
    pub alpha: f64,
    pub calibrations: Vec<CalibrationResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub software_version: String,
    pub seed: u64,
    pub replicates: u64,
    pub alpha: f64,
    pub calibration_replicates: u64,
    pub calibrations: Vec<CalibrationResult>,
    pub results: Vec<OcMetrics>,
}

struct Calibrator<'a> {
    engine: &'a Engine,
    config: &'a BatchConfig,
    cache: HashMap<String, usize>,
    results: Vec<CalibrationResult>,
}

impl Calibrator<'_> {
    fn cutoffs(&mut self, scenario: &ScenarioSpec) -> Result<Vec<f64>> {
        let null = scenario.null_scenario()?;
        let key = design_key(&null)?;
        self.config
            .methods_for(scenario)
            .iter()
            .map(|m| {
                let k = format!("{key}|{}", method_key(m));
                if let Some(&i) = self.cache.get(&k) {
                    return Ok(self.results[i].cutoff);
                }
                let c = self.engine.calibrate_cutoff(
                    &null,
                    m,
                    self.config.alpha,
                    self.config.calibration_replicates,
                    self.config.seed,
                )?;
                let cutoff = c.cutoff;
                self.cache.insert(k, self.results.len());
                self.results.push(c);
                Ok(cutoff)
            })
            .collect()
    }
}

/// Calibrates every (design, method) pair once. Scenarios sharing a null
/// design share their cutoffs.
pub fn calibrate_batch(engine: &Engine, config: &BatchConfig) -> Result<CalibrationReport> {
    config.validate()?;
    let mut cal = Calibrator {
        engine,
        config,
        cache: HashMap::new(),
        results: Vec::new(),
    };
    for s in &config.scenarios {
        cal.cutoffs(s)?;
    }
    Ok(CalibrationReport {
        software_version: VERSION.to_string(),
        seed: config.seed,
        replicates: config.calibration_replicates,
        alpha: config.alpha,
        calibrations: cal.results,
    })
}

/// Calibrates (unless cutoffs are fixed) and runs every scenario.
pub fn simulate_batch(engine: &Engine, config: &BatchConfig) -> Result<SimulationReport> {
    simulate(engine, config, false).map(|(r, _)| r)
}

/// As [`simulate_batch`], also returning every per-replicate decision.
pub fn simulate_batch_traced(engine: &Engine, config: &BatchConfig) -> Result<(SimulationReport, Vec<TraceRecord>)> {
    simulate(engine, config, true)
}

fn simulate(engine: &Engine, config: &BatchConfig, trace: bool) -> Result<(SimulationReport, Vec<TraceRecord>)> {
    config.validate()?;
    let mut cal = Calibrator {
        engine,
        config,
        cache: HashMap::new(),
        results: Vec::new(),
    };
    let mut results = Vec::new();
    let mut records = Vec::new();
    for s in &config.scenarios {
        let cutoffs = match &config.cutoffs {
            Some(c) => c.clone(),
            None => cal.cutoffs(s)?,
        };
        let methods = config.methods_for(s);
        if trace {
            let (m, r) = engine.run_oc_traced(s, methods, &cutoffs, config.replicates, config.seed)?;
            results.extend(m);
            records.extend(r);
        } else {
            results.extend(engine.run_oc(s, methods, &cutoffs, config.replicates, config.seed)?);
        }
    }
    let report = SimulationReport {
        software_version: VERSION.to_string(),
        seed: config.seed,
        replicates: config.replicates,
        alpha: config.alpha,
        calibration_replicates: if config.cutoffs.is_some() { 0 } else { config.calibration_replicates },
        calibrations: cal.results,
        results,
    };
    Ok((report, records))
}

/// A weight-curve request for one scenario. The grid defaults to 21 evenly
/// spaced points over `[θ_h - 2δ, θ_h + 2δ]`, clipped to the endpoint's range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    pub scenario: ScenarioSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_grid: Option<Vec<f64>>,
    #[serde(default = "default_replicates")]
    pub replicates: u64,
    #[serde(default)]
    pub seed: u64,
}

impl CurveConfig {
    pub fn new(scenario: ScenarioSpec) -> Self {
        Self {
            scenario,
            theta_grid: None,
            replicates: DEFAULT_REPLICATES,
            seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_value(config::parse_value(text)?)
    }

    /// Accepts `{"scenario": .., ..}` or a bare scenario object.
    pub fn from_value(value: Value) -> Result<Self> {
        if value.get("scenario").is_none() && value.get("endpoint").is_some() {
            return Ok(Self::new(config::from_value(value)?));
        }
        config::from_value(value)
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        if let Some(g) = &self.theta_grid {
            if g.is_empty() {
                return Err(Error::config("theta_grid", "must not be empty"));
            }
            return Ok(g.clone());
        }
        let prepared = self.scenario.prepare().map_err(|e| at("scenario", e))?;
        let center = prepared.theta_h;
        let delta = self.scenario.delta;
        let last = (DEFAULT_CURVE_POINTS - 1) as f64;
        let grid = (0..DEFAULT_CURVE_POINTS).map(|i| center - 2.0 * delta + 4.0 * delta * i as f64 / last);
        Ok(match self.scenario.endpoint {
            Endpoint::Binary => grid.filter(|t| (0.0..=1.0).contains(t)).collect(),
            Endpoint::Normal => grid.collect(),
        })
    }

    pub fn work(&self) -> Result<u64> {
        Ok(self.grid()?.len() as u64 * self.replicates)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.prepare().map_err(|e| at("scenario", e))?;
        if self.replicates == 0 {
            return Err(Error::config("replicates", "must be at least 1"));
        }
        self.grid().map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveReport {
    pub software_version: String,
    pub seed: u64,
    pub replicates: u64,
    pub scenario_label: String,
    pub points: Vec<WeightPoint>,
}

pub fn curve(engine: &Engine, config: &CurveConfig) -> Result<CurveReport> {
    config.validate()?;
    let grid = config.grid()?;
    let points = engine
        .weight_curve(&config.scenario, &grid, config.replicates, config.seed)
        .map_err(|e| at("theta_grid", e))?;
    Ok(CurveReport {
        software_version: VERSION.to_string(),
        seed: config.seed,
        replicates: config.replicates,
        scenario_label: config.scenario.label.clone(),
        points,
    })
}
