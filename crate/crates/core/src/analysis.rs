//! Single-trial analysis: observed control and treatment data in, posteriors,
//! the SAM weight and the decision for each requested method out.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::comparators::MethodSpec;
use crate::config::{self, at};
use crate::decision::DecisionResult;
use crate::error::{Error, Result};
use crate::mixture::{BetaComponent, MixtureDistribution, NormalComponent, TrialData};
use crate::sam::{sam_weight_binary, sam_weight_normal, SamWeight};
use crate::simulation::{informative_from_historical, Endpoint, PreparedScenario, ScenarioSpec, SigmaSource};
use crate::VERSION;

fn default_methods() -> Vec<MethodSpec> {
    vec![MethodSpec::Sam]
}

/// Input for [`analyze`]. The informative prior is either given directly as
/// `informative_prior` or derived from `historical` data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeConfig {
    #[serde(default)]
    pub label: String,
    pub endpoint: Endpoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub informative_prior: Option<MixtureDistribution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub historical: Option<TrialData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vague: Option<MixtureDistribution>,
    pub delta: f64,
    pub control: TrialData,
    pub treatment: TrialData,
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    #[serde(default)]
    pub sigma_source: SigmaSource,
}

impl AnalyzeConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_value(config::parse_value(text)?)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        config::from_value(value)
    }

    fn check_family(&self, path: &str, data: &TrialData) -> Result<()> {
        if data.family() != self.endpoint.family() {
            return Err(Error::config(path, format!("expected {} data", self.endpoint.family())));
        }
        Ok(())
    }

    /// Resolves priors and checks the configuration.
    pub fn prepare(&self) -> Result<PreparedScenario> {
        self.check_family("control", &self.control)?;
        self.check_family("treatment", &self.treatment)?;
        if let Some(h) = &self.historical {
            self.check_family("historical", h)?;
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::config("delta", "must be positive"));
        }
        match self.cutoff {
            None => return Err(Error::config("cutoff", "a decision cutoff is required")),
            Some(c) if !(0.0..=1.0).contains(&c) => return Err(Error::config("cutoff", "must lie in [0, 1]")),
            _ => {}
        }
        if self.methods.is_empty() {
            return Err(Error::config("methods", "at least one method is required"));
        }
        let family = self.endpoint.family();
        let vague = match &self.vague {
            Some(v) if v.family() != family => return Err(Error::config("vague", format!("expected a {family} mixture"))),
            Some(v) => v.clone(),
            None => self.default_vague()?,
        };
        let informative = match (&self.informative_prior, &self.historical) {
            (Some(inf), _) if inf.family() != family => {
                return Err(Error::config("informative_prior", format!("expected a {family} mixture")))
            }
            (Some(inf), _) => inf.clone(),
            (None, Some(h)) => informative_from_historical(&vague, h).map_err(|e| at("historical", e))?,
            (None, None) => return Err(Error::config("informative_prior", "either `informative_prior` or `historical` is required")),
        };
        let theta_h = informative.mean();
        let spec = ScenarioSpec {
            label: self.label.clone(),
            endpoint: self.endpoint,
            theta_h: None,
            n_h: self.historical.map(|h| h.n()),
            informative: Some(informative.clone()),
            theta: theta_h,
            n: self.control.n(),
            theta_t: theta_h,
            n_t: self.treatment.n(),
            sigma: None,
            delta: self.delta,
            vague: Some(vague.clone()),
            sigma_source: self.sigma_source,
            methods: Some(self.methods.clone()),
        };
        let prepared = PreparedScenario {
            spec,
            theta_h,
            historical: self.historical,
            informative,
            vague,
        };
        for (i, m) in self.methods.iter().enumerate() {
            prepared.check_method(m).map_err(|e| at(format!("methods[{i}]"), e))?;
        }
        Ok(prepared)
    }

    /// Beta(1, 1), or for normal endpoints a unit-information prior centred on
    /// the historical estimate.
    fn default_vague(&self) -> Result<MixtureDistribution> {
        match self.endpoint {
            Endpoint::Binary => Ok(MixtureDistribution::single(BetaComponent::uniform())),
            Endpoint::Normal => {
                let (center, sd) = match (&self.informative_prior, &self.historical) {
                    (_, Some(TrialData::Normal(h))) => (h.mean(), h.sd()),
                    (Some(inf), _) => match &self.control {
                        TrialData::Normal(c) => (inf.mean(), c.sd()),
                        _ => unreachable!("families checked"),
                    },
                    _ => return Err(Error::config("vague", "a vague prior is required")),
                };
                if sd.is_nan() || sd <= 0.0 {
                    return Err(Error::config("vague", "cannot derive a default vague prior from a zero sd"));
                }
                Ok(MixtureDistribution::single(NormalComponent::new(center, sd * sd)?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodAnalysis {
    pub method: MethodSpec,
    pub label: String,
    pub control_posterior: MixtureDistribution,
    pub treatment_posterior: MixtureDistribution,
    /// Prior mixing weight: `w` for SAM, `w̃` for fixed mixtures.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior_weight: Option<f64>,
    pub decision: DecisionResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub software_version: String,
    pub seed: Option<u64>,
    pub replicates: Option<u64>,
    pub label: String,
    pub informative_prior: MixtureDistribution,
    pub vague: MixtureDistribution,
    pub sam_weight: SamWeight,
    pub results: Vec<MethodAnalysis>,
}

/// Analyzes observed data under every configured method.
pub fn analyze(config: &AnalyzeConfig) -> Result<AnalysisReport> {
    let prepared = config.prepare()?;
    let cutoff = config.cutoff.expect("checked in prepare");
    let sam_sigma = prepared.control_sigma(&MethodSpec::Sam, &config.control)?;
    let sam_weight = match (&config.control, sam_sigma) {
        (TrialData::Binary(d), _) => sam_weight_binary(prepared.informative.mean(), config.delta, d),
        (TrialData::Normal(d), Some(s)) => sam_weight_normal(prepared.informative.mean(), config.delta, s, d),
        (TrialData::Normal(_), None) => unreachable!("normal data always has a sigma"),
    }
    .map_err(|e| at("delta", e))?;
    let treatment_posterior = prepared.treatment_posterior(&config.treatment)?;
    let results = config
        .methods
        .iter()
        .map(|m| {
            let (control_posterior, prior_weight, _) = prepared.control_posterior(m, &config.control)?;
            let decision = DecisionResult::new(&treatment_posterior, &control_posterior, cutoff)?;
            Ok(MethodAnalysis {
                method: *m,
                label: m.label(),
                control_posterior,
                treatment_posterior: treatment_posterior.clone(),
                prior_weight,
                decision,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AnalysisReport {
        software_version: VERSION.to_string(),
        seed: None,
        replicates: None,
        label: config.label.clone(),
        informative_prior: prepared.informative,
        vague: prepared.vague,
        sam_weight,
        results,
    })
}
