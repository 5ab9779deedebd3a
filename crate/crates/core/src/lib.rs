//! Self-adapting mixture (SAM) priors for borrowing historical control data.
//!
//! The crate covers conjugate Beta/Normal mixture algebra, the SAM mixing
//! weight, the usual comparators (vague prior, fixed-weight mixture, power
//! prior), the posterior superiority decision rule and a deterministic,
//! parallel operating-characteristics simulator.
//!
//! ```
//! use sam_prior::{sam_posterior, BetaComponent, BinarySummary, MixtureDistribution};
//!
//! let informative = MixtureDistribution::single(BetaComponent::new(121.0, 181.0).unwrap());
//! let vague = MixtureDistribution::single(BetaComponent::uniform());
//! let data = BinarySummary::new(60, 150).unwrap().into();
//! let (posterior, weight) = sam_posterior(&informative, &vague, 0.1, &data, None).unwrap();
//! assert!(weight.w > 0.9);
//! assert!((posterior.mean() - 0.4).abs() < 0.01);
//! ```

pub mod analysis;
pub mod batch;
pub mod comparators;
pub mod config;
pub mod decision;
mod error;
pub mod mixture;
pub mod quadrature;
pub mod report;
pub mod sam;
pub mod simulation;
pub mod special;

pub use analysis::{analyze, AnalysisReport, AnalyzeConfig, MethodAnalysis};
pub use batch::{calibrate_batch, simulate_batch, BatchConfig, CalibrationReport, CurveConfig, CurveReport, SimulationReport};
pub use comparators::{fixed_mixture_posterior, np_posterior, power_prior_posterior, MethodSpec};
pub use decision::{decide, posterior_point_estimate, prob_superiority, DecisionResult};
pub use error::{Error, Result};
pub use mixture::{
    beta_log_marginal, log_beta_function, mixture_cdf, mixture_mean, mixture_quantile, mixture_update, normal_log_marginal,
    BetaComponent, BinarySummary, Component, Family, MixtureDistribution, NormalComponent, NormalSummary, TrialData,
};
pub use sam::{build_sam_prior, estimate_theta_h, sam_posterior, sam_weight_binary, sam_weight_normal, SamWeight, Side};
pub use simulation::{
    build_historical, calibrate_cutoff, generate_replicate, relative_metrics, run_oc, weight_curve, CalibrationResult, Endpoint,
    Engine, OcMetrics, ScenarioSpec, SigmaSource, WeightPoint,
};

/// Version string embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
