use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::{replicate_rng, Arm, StreamPurpose};
use super::scenario::{Endpoint, PreparedScenario, ScenarioSpec};
use crate::comparators::MethodSpec;
use crate::decision::{decide, prob_superiority, DecisionResult};
use crate::error::{Error, Result};
use crate::mixture::{BinarySummary, MixtureDistribution, NormalSummary, TrialData};
use crate::sam::{sam_weight_binary, sam_weight_normal, SamWeight};

pub const MIN_CALIBRATION_REPLICATES: u64 = 1000;

/// Draws one replicate's control and treatment data.
///
/// Binary arms count uniforms below `θ` (so counts are monotone in `θ` for a
/// fixed stream); normal arms draw `n` observations and reduce them to a
/// summary. Control and treatment use separate streams.
pub fn generate_replicate(spec: &ScenarioSpec, seed: u64, purpose: StreamPurpose, replicate: u64) -> Result<(TrialData, TrialData)> {
    let control = draw_arm(spec, spec.theta, spec.n, seed, purpose, replicate, Arm::Control)?;
    let treatment = draw_arm(spec, spec.theta_t, spec.n_t, seed, purpose, replicate, Arm::Treatment)?;
    Ok((control, treatment))
}

fn draw_arm(spec: &ScenarioSpec, theta: f64, n: u64, seed: u64, purpose: StreamPurpose, replicate: u64, arm: Arm) -> Result<TrialData> {
    let mut rng = replicate_rng(seed, purpose, replicate, arm);
    match spec.endpoint {
        Endpoint::Binary => {
            let x = (0..n).filter(|_| rng.random::<f64>() < theta).count() as u64;
            Ok(BinarySummary::new(x, n)?.into())
        }
        Endpoint::Normal => {
            let sigma = spec.sigma.unwrap_or(1.0);
            let ys: Vec<f64> = (0..n)
                .map(|_| theta + sigma * rng.sample::<f64, _>(StandardNormal))
                .collect();
            Ok(NormalSummary::from_observations(&ys)?.into())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateAnalysis {
    pub control_posterior: MixtureDistribution,
    pub treatment_posterior: MixtureDistribution,
    pub prob_superiority: f64,
    pub prior_weight: Option<f64>,
    pub sam_weight: Option<SamWeight>,
}

/// Analyzes one replicate: the treatment arm always with the vague prior, the
/// control arm with `method`.
pub fn analyze_replicate(prepared: &PreparedScenario, method: &MethodSpec, control: &TrialData, treatment: &TrialData) -> Result<ReplicateAnalysis> {
    let treatment_posterior = prepared.treatment_posterior(treatment)?;
    let (control_posterior, prior_weight, sam_weight) = prepared.control_posterior(method, control)?;
    let prob = prob_superiority(&treatment_posterior, &control_posterior)?;
    Ok(ReplicateAnalysis {
        control_posterior,
        treatment_posterior,
        prob_superiority: prob,
        prior_weight,
        sam_weight,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub scenario_label: String,
    pub method: MethodSpec,
    pub method_label: String,
    pub cutoff: f64,
    pub alpha_target: f64,
    pub replicates: u64,
    pub seed: u64,
}

/// Operating characteristics of one method in one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcMetrics {
    pub scenario_label: String,
    pub method: MethodSpec,
    pub method_label: String,
    pub cutoff: f64,
    pub rejection_rate: f64,
    pub bias: f64,
    pub mse: f64,
    pub mean_weight: Option<f64>,
    pub relative_bias: f64,
    pub relative_mse: f64,
    pub replicates: u64,
    pub seed: u64,
    /// Fingerprint of the simulated data this method was evaluated on.
    pub data_digest: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightPoint {
    pub theta: f64,
    pub mean_w: f64,
}

/// One method's decision on one replicate, for `--trace` dumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub scenario_label: String,
    pub replicate: u64,
    pub method_label: String,
    pub decision: DecisionResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sam_weight: Option<SamWeight>,
}

/// `target` with its relative metrics taken against an NP run on the same data.
pub fn relative_metrics(target: &OcMetrics, reference_np: &OcMetrics) -> Result<OcMetrics> {
    if target.scenario_label != reference_np.scenario_label
        || target.seed != reference_np.seed
        || target.replicates != reference_np.replicates
        || target.data_digest != reference_np.data_digest
    {
        return Err(Error::LineageMismatch(format!(
            "{} and {} were not evaluated on the same replicate stream",
            target.method_label, reference_np.method_label
        )));
    }
    Ok(OcMetrics {
        relative_bias: target.bias - reference_np.bias,
        relative_mse: target.mse - reference_np.mse,
        ..target.clone()
    })
}

type Tick = Arc<dyn Fn() + Send + Sync>;

/// Runs simulations, optionally on a dedicated thread pool and with a
/// per-replicate progress callback. Results never depend on the thread count.
#[derive(Clone, Default)]
pub struct Engine {
    pool: Option<Arc<rayon::ThreadPool>>,
    on_replicate: Option<Tick>,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("threads", &self.pool.as_ref().map(|p| p.current_num_threads()))
            .finish()
    }
}

struct Outcome {
    prob: f64,
    estimate: f64,
    weight: Option<f64>,
    sam_weight: Option<SamWeight>,
    treatment_mean: f64,
}

struct ReplicateOutcome {
    digest: u64,
    methods: Vec<Outcome>,
}

fn fnv1a(mut hash: u64, bytes: &[u8]) -> u64 {
    for b in bytes {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn digest_data(data: &TrialData) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325;
    match data {
        TrialData::Binary(d) => {
            h = fnv1a(h, &d.x().to_le_bytes());
            h = fnv1a(h, &d.n().to_le_bytes());
        }
        TrialData::Normal(d) => {
            h = fnv1a(h, &d.n().to_le_bytes());
            h = fnv1a(h, &d.mean().to_bits().to_le_bytes());
            h = fnv1a(h, &d.sd().to_bits().to_le_bytes());
        }
    }
    h
}

impl Engine {
    pub fn new() -> Self {
        Self::default()
    }

    /// Uses a dedicated pool with `threads` workers.
    pub fn with_threads(mut self, threads: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| Error::domain(format!("cannot build thread pool: {e}")))?;
        self.pool = Some(Arc::new(pool));
        Ok(self)
    }

    /// Invokes `tick` once per finished replicate (from worker threads).
    pub fn with_progress(mut self, tick: impl Fn() + Send + Sync + 'static) -> Self {
        self.on_replicate = Some(Arc::new(tick));
        self
    }

    fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match &self.pool {
            Some(pool) => pool.install(f),
            None => f(),
        }
    }

    fn tick(&self) {
        if let Some(t) = &self.on_replicate {
            t();
        }
    }

    /// Per-replicate results in replicate order.
    fn map_replicates<T: Send>(&self, replicates: u64, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
        self.install(|| {
            (0..replicates)
                .into_par_iter()
                .map(|r| {
                    let out = f(r);
                    self.tick();
                    out
                })
                .collect()
        })
    }

    /// Posterior superiority probabilities for `method` over `replicates` draws.
    pub fn superiority_probabilities(&self, spec: &ScenarioSpec, method: &MethodSpec, replicates: u64, seed: u64, purpose: StreamPurpose) -> Result<Vec<f64>> {
        let prepared = spec.prepare()?;
        prepared.check_method(method)?;
        self.map_replicates(replicates, |r| {
            let (c, t) = generate_replicate(&prepared.spec, seed, purpose, r)?;
            Ok(analyze_replicate(&prepared, method, &c, &t)?.prob_superiority)
        })
    }

    /// Cutoff such that the strict rule `p > C` rejects at most a fraction
    /// `alpha` of the simulated null replicates: the ⌈(1-α)R⌉-th order statistic.
    pub fn calibrate_cutoff(&self, spec_null: &ScenarioSpec, method: &MethodSpec, alpha: f64, replicates: u64, seed: u64) -> Result<CalibrationResult> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if replicates < MIN_CALIBRATION_REPLICATES {
            return Err(Error::domain(format!(
                "calibration needs at least {MIN_CALIBRATION_REPLICATES} replicates, got {replicates}"
            )));
        }
        if spec_null.theta != spec_null.theta_t {
            return Err(Error::InvalidScenario {
                label: spec_null.label.clone(),
                reason: "calibration requires a null scenario (theta_t == theta)".into(),
            });
        }
        let mut probs = self.superiority_probabilities(spec_null, method, replicates, seed, StreamPurpose::Calibration)?;
        probs.sort_by(f64::total_cmp);
        let rank = cutoff_rank(alpha, replicates);
        Ok(CalibrationResult {
            scenario_label: spec_null.label.clone(),
            method: *method,
            method_label: method.label(),
            cutoff: probs[rank - 1],
            alpha_target: alpha,
            replicates,
            seed,
        })
    }

    /// Operating characteristics for every method on a shared replicate stream.
    pub fn run_oc(&self, spec: &ScenarioSpec, methods: &[MethodSpec], cutoffs: &[f64], replicates: u64, seed: u64) -> Result<Vec<OcMetrics>> {
        self.run(spec, methods, cutoffs, replicates, seed, false).map(|(m, _)| m)
    }

    /// As [`Engine::run_oc`], also returning every per-replicate decision.
    pub fn run_oc_traced(&self, spec: &ScenarioSpec, methods: &[MethodSpec], cutoffs: &[f64], replicates: u64, seed: u64) -> Result<(Vec<OcMetrics>, Vec<TraceRecord>)> {
        self.run(spec, methods, cutoffs, replicates, seed, true)
    }

    fn run(&self, spec: &ScenarioSpec, methods: &[MethodSpec], cutoffs: &[f64], replicates: u64, seed: u64, trace: bool) -> Result<(Vec<OcMetrics>, Vec<TraceRecord>)> {
        if methods.len() != cutoffs.len() {
            return Err(Error::domain(format!("{} methods but {} cutoffs", methods.len(), cutoffs.len())));
        }
        if replicates == 0 {
            return Err(Error::domain("replicates must be at least 1"));
        }
        let prepared = spec.prepare()?;
        for m in methods {
            prepared.check_method(m)?;
        }
        // NP is always evaluated (last) so relative metrics have a reference.
        let mut all: Vec<MethodSpec> = methods.to_vec();
        all.push(MethodSpec::Np);

        let outcomes = self.map_replicates(replicates, |r| {
            let (control, treatment) = generate_replicate(&prepared.spec, seed, StreamPurpose::Simulation, r)?;
            let post_t = prepared.treatment_posterior(&treatment)?;
            let treatment_mean = post_t.mean();
            let digest = fnv1a(digest_data(&control), &digest_data(&treatment).to_le_bytes());
            let methods = all
                .iter()
                .map(|m| {
                    let (post_c, weight, sam_weight) = prepared.control_posterior(m, &control)?;
                    Ok(Outcome {
                        prob: prob_superiority(&post_t, &post_c)?,
                        estimate: post_c.mean(),
                        weight,
                        sam_weight,
                        treatment_mean,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ReplicateOutcome { digest, methods })
        })?;

        let np_index = all.len() - 1;
        let theta = spec.theta;
        let mut metrics: Vec<OcMetrics> = Vec::with_capacity(all.len());
        for (k, method) in all.iter().enumerate() {
            let cutoff = if k == np_index { f64::INFINITY } else { cutoffs[k] };
            let (mut rejections, mut bias, mut sq, mut wsum) = (0u64, 0.0, 0.0, 0.0);
            let mut digest = 0xcbf2_9ce4_8422_2325u64;
            let mut has_weight = false;
            for rep in &outcomes {
                let o = &rep.methods[k];
                if decide(o.prob, cutoff) {
                    rejections += 1;
                }
                let err = o.estimate - theta;
                bias += err;
                sq += err * err;
                if let Some(w) = o.weight {
                    wsum += w;
                    has_weight = true;
                }
                digest = fnv1a(digest, &rep.digest.to_le_bytes());
            }
            let r = replicates as f64;
            metrics.push(OcMetrics {
                scenario_label: spec.label.clone(),
                method: *method,
                method_label: method.label(),
                cutoff,
                rejection_rate: rejections as f64 / r,
                bias: bias / r,
                mse: sq / r,
                mean_weight: has_weight.then(|| wsum / r),
                relative_bias: 0.0,
                relative_mse: 0.0,
                replicates,
                seed,
                data_digest: format!("{digest:016x}"),
            });
        }
        let np = metrics.pop().expect("NP reference");
        let metrics = metrics
            .iter()
            .map(|m| relative_metrics(m, &np))
            .collect::<Result<Vec<_>>>()?;

        let mut records = Vec::new();
        if trace {
            for (r, rep) in outcomes.iter().enumerate() {
                for (k, method) in methods.iter().enumerate() {
                    let o = &rep.methods[k];
                    records.push(TraceRecord {
                        scenario_label: spec.label.clone(),
                        replicate: r as u64,
                        method_label: method.label(),
                        decision: DecisionResult {
                            prob_superiority: o.prob,
                            cutoff: cutoffs[k],
                            reject: decide(o.prob, cutoffs[k]),
                            control_mean: o.estimate,
                            treatment_mean: o.treatment_mean,
                        },
                        sam_weight: o.sam_weight,
                    });
                }
            }
        }
        Ok((metrics, records))
    }

    /// Mean SAM weight as a function of the true control parameter. The same
    /// streams are reused at every grid point.
    pub fn weight_curve(&self, spec: &ScenarioSpec, theta_grid: &[f64], replicates: u64, seed: u64) -> Result<Vec<WeightPoint>> {
        if replicates == 0 {
            return Err(Error::domain("replicates must be at least 1"));
        }
        let prepared = spec.prepare()?;
        let theta_h_hat = prepared.informative.mean();
        for &theta in theta_grid {
            let ok = match spec.endpoint {
                Endpoint::Binary => (0.0..=1.0).contains(&theta),
                Endpoint::Normal => theta.is_finite(),
            };
            if !ok {
                return Err(Error::InvalidScenario {
                    label: spec.label.clone(),
                    reason: format!("grid value {theta} is outside the endpoint's range"),
                });
            }
        }
        let mut points = Vec::with_capacity(theta_grid.len());
        for &theta in theta_grid {
            let at = ScenarioSpec { theta, ..spec.clone() };
            let weights = self.map_replicates(replicates, |r| {
                let control = draw_arm(&at, theta, at.n, seed, StreamPurpose::WeightCurve, r, Arm::Control)?;
                let w = match control {
                    TrialData::Binary(d) => sam_weight_binary(theta_h_hat, spec.delta, &d)?,
                    TrialData::Normal(d) => {
                        let sigma = prepared.control_sigma(&MethodSpec::Sam, &control)?.expect("normal");
                        sam_weight_normal(theta_h_hat, spec.delta, sigma, &d)?
                    }
                };
                Ok(w.w)
            })?;
            points.push(WeightPoint {
                theta,
                mean_w: weights.iter().sum::<f64>() / replicates as f64,
            });
        }
        Ok(points)
    }
}

/// 1-based rank of the order statistic used as the cutoff.
fn cutoff_rank(alpha: f64, replicates: u64) -> usize {
    let k = ((1.0 - alpha) * replicates as f64 - 1e-9).ceil() as u64;
    k.clamp(1, replicates) as usize
}

pub fn calibrate_cutoff(spec_null: &ScenarioSpec, method: &MethodSpec, alpha: f64, replicates: u64, seed: u64) -> Result<CalibrationResult> {
    Engine::new().calibrate_cutoff(spec_null, method, alpha, replicates, seed)
}

pub fn run_oc(spec: &ScenarioSpec, methods: &[MethodSpec], cutoffs: &[f64], replicates: u64, seed: u64) -> Result<Vec<OcMetrics>> {
    Engine::new().run_oc(spec, methods, cutoffs, replicates, seed)
}

pub fn weight_curve(spec: &ScenarioSpec, theta_grid: &[f64], replicates: u64, seed: u64) -> Result<Vec<WeightPoint>> {
    Engine::new().weight_curve(spec, theta_grid, replicates, seed)
}
