use serde::{Deserialize, Serialize};

use crate::comparators::{np_posterior, power_prior_posterior, fixed_mixture_posterior, MethodSpec};
use crate::error::{Error, Result};
use crate::mixture::{BetaComponent, BinarySummary, Component, Family, MixtureDistribution, NormalComponent, NormalSummary, TrialData};
use crate::sam::{sam_posterior, SamWeight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Binary,
    Normal,
}

impl Endpoint {
    pub fn family(&self) -> Family {
        match self {
            Endpoint::Binary => Family::Beta,
            Endpoint::Normal => Family::Normal,
        }
    }
}

/// Source of the plug-in standard deviation used by borrowing methods on
/// continuous endpoints.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaSource {
    /// Pooled over the current control arm and the historical data.
    #[default]
    Pooled,
    /// Current control arm only.
    Current,
}

/// One simulation scenario.
///
/// The informative prior is either derived from a fixed historical dataset
/// (`theta_h`, `n_h`, and `sigma` for normal endpoints) or supplied directly as
/// `informative`. `vague` defaults to Beta(1, 1) for binary endpoints and to the
/// unit-information prior N(θ_h, σ²) for normal endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(default)]
    pub label: String,
    pub endpoint: Endpoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_h: Option<u64>,
    #[serde(default, rename = "informative_prior", alias = "informative", skip_serializing_if = "Option::is_none")]
    pub informative: Option<MixtureDistribution>,
    pub theta: f64,
    pub n: u64,
    pub theta_t: f64,
    pub n_t: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vague: Option<MixtureDistribution>,
    #[serde(default)]
    pub sigma_source: SigmaSource,
    /// Per-scenario method list, overriding the batch-level one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub methods: Option<Vec<MethodSpec>>,
}

impl ScenarioSpec {
    fn invalid(&self, reason: impl Into<String>) -> Error {
        Error::InvalidScenario {
            label: self.label.clone(),
            reason: reason.into(),
        }
    }

    /// The calibration scenario for this design: null (`θ_t = θ`) and congruent (`θ = θ_h`).
    pub fn null_scenario(&self) -> Result<ScenarioSpec> {
        let theta_h = self.resolved_theta_h()?;
        Ok(ScenarioSpec {
            label: format!("{} [null]", self.label),
            theta: theta_h,
            theta_t: theta_h,
            ..self.clone()
        })
    }

    fn resolved_theta_h(&self) -> Result<f64> {
        match (self.theta_h, &self.informative) {
            (Some(t), _) => Ok(t),
            (None, Some(inf)) => Ok(inf.mean()),
            (None, None) => Err(self.invalid("either `theta_h` or `informative_prior` is required")),
        }
    }

    /// Validates the scenario and derives its priors and historical data.
    pub fn prepare(&self) -> Result<PreparedScenario> {
        let family = self.endpoint.family();
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(self.invalid("`delta` must be positive"));
        }
        if self.n == 0 || self.n_t == 0 {
            return Err(self.invalid("`n` and `n_t` must be at least 1"));
        }
        match self.endpoint {
            Endpoint::Binary => {
                for (name, v) in [("theta", self.theta), ("theta_t", self.theta_t)] {
                    if !(v > 0.0 && v < 1.0) {
                        return Err(self.invalid(format!("`{name}` must lie in (0, 1) for binary endpoints")));
                    }
                }
            }
            Endpoint::Normal => {
                match self.sigma {
                    Some(s) if s.is_finite() && s > 0.0 => {}
                    _ => return Err(self.invalid("normal endpoints need a positive `sigma`")),
                }
                if !(self.theta.is_finite() && self.theta_t.is_finite()) {
                    return Err(self.invalid("`theta` and `theta_t` must be finite"));
                }
            }
        }
        let theta_h = self.resolved_theta_h()?;
        if self.endpoint == Endpoint::Binary && !(theta_h > 0.0 && theta_h < 1.0) {
            return Err(self.invalid("`theta_h` must lie in (0, 1) for binary endpoints"));
        }
        let vague = match &self.vague {
            Some(v) => v.clone(),
            None => match self.endpoint {
                Endpoint::Binary => MixtureDistribution::single(BetaComponent::uniform()),
                Endpoint::Normal => {
                    let s = self.sigma.unwrap_or(1.0);
                    MixtureDistribution::single(NormalComponent::new(theta_h, s * s)?)
                }
            },
        };
        if vague.family() != family {
            return Err(self.invalid(format!("`vague` must be a {family} mixture")));
        }
        let historical = match self.n_h {
            Some(_) => Some(build_historical(self)?),
            None => None,
        };
        let informative = match (&self.informative, &historical) {
            (Some(inf), _) => inf.clone(),
            (None, Some(h)) => informative_from_historical(&vague, h).map_err(|e| self.invalid(e.to_string()))?,
            (None, None) => return Err(self.invalid("either `n_h` or `informative_prior` is required")),
        };
        if informative.family() != family {
            return Err(self.invalid(format!("`informative_prior` must be a {family} mixture")));
        }
        if self.endpoint == Endpoint::Binary {
            // δ must leave at least one alternative inside (0, 1)
            let th = informative.mean();
            if th + self.delta >= 1.0 && th - self.delta <= 0.0 {
                return Err(Error::DeltaIncompatible {
                    theta_h_hat: th,
                    delta: self.delta,
                });
            }
        }
        Ok(PreparedScenario {
            spec: self.clone(),
            theta_h,
            historical,
            informative,
            vague,
        })
    }
}

/// The informative prior implied by historical data: the vague prior updated
/// by `D_h` for binary endpoints, `N(ȳ_h, s_h²/n_h)` for normal ones.
pub fn informative_from_historical(vague: &MixtureDistribution, historical: &TrialData) -> Result<MixtureDistribution> {
    match historical {
        TrialData::Binary(h) => {
            if !vague.is_single() {
                return Err(Error::InvalidMixture(
                    "deriving the informative prior needs a single-component vague prior".into(),
                ));
            }
            vague.update(&TrialData::Binary(*h), None)
        }
        TrialData::Normal(h) => Ok(MixtureDistribution::single(NormalComponent::new(
            h.mean(),
            h.variance() / h.n() as f64,
        )?)),
    }
}

/// The fixed historical dataset: `x_h = round(θ_h n_h)` for binary endpoints,
/// and a summary with mean exactly `θ_h` and sd exactly `σ` for normal ones.
pub fn build_historical(spec: &ScenarioSpec) -> Result<TrialData> {
    let invalid = |reason: &str| Error::InvalidScenario {
        label: spec.label.clone(),
        reason: reason.into(),
    };
    let n_h = spec.n_h.filter(|n| *n >= 1).ok_or_else(|| invalid("`n_h` must be at least 1"))?;
    let theta_h = spec.theta_h.ok_or_else(|| invalid("`theta_h` is required with `n_h`"))?;
    match spec.endpoint {
        Endpoint::Binary => {
            let x = (theta_h * n_h as f64).round();
            if !(x >= 0.0 && x <= n_h as f64) {
                return Err(invalid("round(theta_h * n_h) falls outside [0, n_h]"));
            }
            Ok(BinarySummary::new(x as u64, n_h)?.into())
        }
        Endpoint::Normal => {
            let sigma = spec.sigma.ok_or_else(|| invalid("`sigma` is required for normal endpoints"))?;
            Ok(NormalSummary::new(n_h, theta_h, sigma)?.into())
        }
    }
}

/// A validated scenario with its priors resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedScenario {
    pub spec: ScenarioSpec,
    pub theta_h: f64,
    pub historical: Option<TrialData>,
    pub informative: MixtureDistribution,
    pub vague: MixtureDistribution,
}

impl PreparedScenario {
    pub fn label(&self) -> &str {
        &self.spec.label
    }

    pub fn endpoint(&self) -> Endpoint {
        self.spec.endpoint
    }

    pub fn check_method(&self, method: &MethodSpec) -> Result<()> {
        if matches!(method, MethodSpec::PowerPrior { .. }) && self.historical.is_none() {
            return Err(Error::InvalidScenario {
                label: self.spec.label.clone(),
                reason: "the power prior needs raw historical data (`n_h`)".into(),
            });
        }
        Ok(())
    }

    fn historical_sd(&self) -> Option<f64> {
        match self.historical {
            Some(TrialData::Normal(h)) if h.n() >= 2 => Some(h.sd()),
            _ => None,
        }
    }

    fn own_sd(&self, data: &NormalSummary) -> Result<f64> {
        if data.n() >= 2 {
            return Ok(data.sd());
        }
        self.historical_sd().ok_or_else(|| Error::InvalidScenario {
            label: self.spec.label.clone(),
            reason: "cannot estimate sigma from fewer than two observations".into(),
        })
    }

    /// Plug-in σ̂ for the control arm under `method`. NP only sees the
    /// current data; borrowing methods follow `sigma_source`.
    pub fn control_sigma(&self, method: &MethodSpec, control: &TrialData) -> Result<Option<f64>> {
        let TrialData::Normal(d) = control else {
            return Ok(None);
        };
        if matches!(method, MethodSpec::Np) || self.spec.sigma_source == SigmaSource::Current {
            return self.own_sd(d).map(Some);
        }
        match self.historical {
            Some(TrialData::Normal(h)) if h.n() + d.n() >= 3 => {
                let ss = d.sum_sq_dev() + h.sum_sq_dev();
                Ok(Some((ss / (h.n() + d.n() - 2) as f64).sqrt()))
            }
            _ => self.own_sd(d).map(Some),
        }
    }

    pub fn treatment_posterior(&self, treatment: &TrialData) -> Result<MixtureDistribution> {
        let sigma = match treatment {
            TrialData::Normal(d) => Some(self.own_sd(d)?),
            TrialData::Binary(_) => None,
        };
        np_posterior(&self.vague, treatment, sigma)
    }

    /// Control-arm posterior under `method`, with the prior mixing weight used
    /// (`w` for SAM, `w̃` for fixed mixtures).
    pub fn control_posterior(&self, method: &MethodSpec, control: &TrialData) -> Result<(MixtureDistribution, Option<f64>, Option<SamWeight>)> {
        let sigma = self.control_sigma(method, control)?;
        Ok(match method {
            MethodSpec::Np => (np_posterior(&self.vague, control, sigma)?, None, None),
            MethodSpec::FixedMixture { w_tilde } => (
                fixed_mixture_posterior(&self.informative, &self.vague, *w_tilde, control, sigma)?,
                Some(*w_tilde),
                None,
            ),
            MethodSpec::Sam => {
                let (post, w) = sam_posterior(&self.informative, &self.vague, self.spec.delta, control, sigma)?;
                (post, Some(w.w), Some(w))
            }
            MethodSpec::PowerPrior { gamma_grid } => {
                self.check_method(method)?;
                let hist = self.historical.as_ref().expect("checked");
                let vague = self.power_prior_base()?;
                (power_prior_posterior(&vague, hist, control, *gamma_grid, sigma)?, None, None)
            }
        })
    }

    fn power_prior_base(&self) -> Result<MixtureDistribution> {
        match self.vague.components() {
            [Component::Beta(_)] | [Component::Normal(_)] => Ok(self.vague.clone()),
            _ => Err(Error::InvalidMixture("the power prior needs a single-component vague prior".into())),
        }
    }
}
