//! Monte Carlo operating characteristics: scenario construction, replicate
//! generation, cutoff calibration and per-method metrics.

mod engine;
mod rng;
mod scenario;

pub use engine::{
    analyze_replicate, calibrate_cutoff, generate_replicate, relative_metrics, run_oc, weight_curve, CalibrationResult, Engine,
    OcMetrics, ReplicateAnalysis, TraceRecord, WeightPoint, MIN_CALIBRATION_REPLICATES,
};
pub use rng::{replicate_rng, Arm, StreamPurpose};
pub use scenario::{build_historical, informative_from_historical, Endpoint, PreparedScenario, ScenarioSpec, SigmaSource};
