//! Reference analyses: the vague-prior-only analysis (NP), the fixed-weight
//! mixture (robust MAP style) and the normalized power prior with a uniform
//! prior on the power parameter, evaluated on a midpoint grid.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::{BetaComponent, Component, MixtureDistribution, NormalComponent, TrialData};
use crate::sam::build_sam_prior;

pub const DEFAULT_GAMMA_GRID: usize = 101;

/// An analysis method for the control arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMethodSpec", into = "RawMethodSpec")]
pub enum MethodSpec {
    Np,
    FixedMixture { w_tilde: f64 },
    Sam,
    PowerPrior { gamma_grid: usize },
}

impl MethodSpec {
    pub fn mix(w_tilde: f64) -> Self {
        MethodSpec::FixedMixture { w_tilde }
    }

    pub fn power_prior() -> Self {
        MethodSpec::PowerPrior {
            gamma_grid: DEFAULT_GAMMA_GRID,
        }
    }

    /// Short display label, e.g. `NP`, `SAM`, `Mix50`, `PP`.
    pub fn label(&self) -> String {
        match self {
            MethodSpec::Np => "NP".into(),
            MethodSpec::Sam => "SAM".into(),
            MethodSpec::PowerPrior { .. } => "PP".into(),
            MethodSpec::FixedMixture { w_tilde } => {
                let pct = w_tilde * 100.0;
                if (pct - pct.round()).abs() < 1e-9 {
                    format!("Mix{}", pct.round() as i64)
                } else {
                    format!("Mix{w_tilde}")
                }
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            MethodSpec::Np => "np",
            MethodSpec::FixedMixture { .. } => "mix",
            MethodSpec::Sam => "sam",
            MethodSpec::PowerPrior { .. } => "pp",
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Wire form: `{"kind": "np"|"mix"|"sam"|"pp", "w_tilde": .., "gamma_grid": ..}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMethodSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_tilde: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_grid: Option<usize>,
}

impl TryFrom<RawMethodSpec> for MethodSpec {
    type Error = Error;

    fn try_from(raw: RawMethodSpec) -> Result<Self> {
        let invalid = |reason: &str| Error::InvalidMethod {
            kind: raw.kind.clone(),
            reason: reason.into(),
        };
        let spec = match raw.kind.as_str() {
            "np" => MethodSpec::Np,
            "sam" => MethodSpec::Sam,
            "mix" => {
                let w = raw.w_tilde.ok_or_else(|| invalid("`w_tilde` is required"))?;
                if !(0.0..=1.0).contains(&w) {
                    return Err(invalid("`w_tilde` must lie in [0, 1]"));
                }
                MethodSpec::FixedMixture { w_tilde: w }
            }
            "pp" => {
                let g = raw.gamma_grid.unwrap_or(DEFAULT_GAMMA_GRID);
                if g < 2 {
                    return Err(invalid("`gamma_grid` must be at least 2"));
                }
                MethodSpec::PowerPrior { gamma_grid: g }
            }
            other => return Err(Error::UnsupportedMethod(other.to_string())),
        };
        if raw.w_tilde.is_some() && raw.kind != "mix" {
            return Err(invalid("`w_tilde` only applies to kind `mix`"));
        }
        if raw.gamma_grid.is_some() && raw.kind != "pp" {
            return Err(invalid("`gamma_grid` only applies to kind `pp`"));
        }
        Ok(spec)
    }
}

impl From<MethodSpec> for RawMethodSpec {
    fn from(spec: MethodSpec) -> Self {
        let (w_tilde, gamma_grid) = match spec {
            MethodSpec::FixedMixture { w_tilde } => (Some(w_tilde), None),
            MethodSpec::PowerPrior { gamma_grid } => (None, Some(gamma_grid)),
            _ => (None, None),
        };
        RawMethodSpec {
            kind: spec.kind().into(),
            w_tilde,
            gamma_grid,
        }
    }
}

/// Posterior under the vague prior alone.
pub fn np_posterior(vague: &MixtureDistribution, data: &TrialData, sigma_hat: Option<f64>) -> Result<MixtureDistribution> {
    vague.update(data, sigma_hat.map(|s| s * s))
}

/// Posterior under `w̃ · informative + (1 - w̃) · vague`.
pub fn fixed_mixture_posterior(
    informative: &MixtureDistribution,
    vague: &MixtureDistribution,
    w_tilde: f64,
    data: &TrialData,
    sigma_hat: Option<f64>,
) -> Result<MixtureDistribution> {
    if !(0.0..=1.0).contains(&w_tilde) {
        return Err(Error::domain(format!("w_tilde must lie in [0, 1], got {w_tilde}")));
    }
    build_sam_prior(informative, vague, w_tilde)?.update(data, sigma_hat.map(|s| s * s))
}

/// Midpoints `(g + ½) / G` of a uniform partition of `[0, 1]`.
pub fn midpoint_grid(grid_size: usize) -> Result<Vec<f64>> {
    if grid_size < 2 {
        return Err(Error::domain(format!("gamma grid needs at least 2 points, got {grid_size}")));
    }
    let g = grid_size as f64;
    Ok((0..grid_size).map(|i| (i as f64 + 0.5) / g).collect())
}

/// Normalized power prior posterior on the default midpoint grid.
pub fn power_prior_posterior(
    vague: &MixtureDistribution,
    historical: &TrialData,
    data: &TrialData,
    grid_size: usize,
    sigma_hat: Option<f64>,
) -> Result<MixtureDistribution> {
    let grid = midpoint_grid(grid_size)?;
    power_prior_posterior_on_grid(vague, historical, data, &grid, sigma_hat)
}

/// Normalized power prior posterior over an explicit, equally weighted set of
/// power parameters.
///
/// For each `γ` the conditional prior is the vague component updated with the
/// historical data discounted by `γ`; the `γ` posterior is proportional to the
/// marginal likelihood of the current data under that conditional prior.
pub fn power_prior_posterior_on_grid(
    vague: &MixtureDistribution,
    historical: &TrialData,
    data: &TrialData,
    gammas: &[f64],
    sigma_hat: Option<f64>,
) -> Result<MixtureDistribution> {
    if gammas.is_empty() {
        return Err(Error::domain("gamma grid is empty"));
    }
    if gammas.iter().any(|g| !(0.0..=1.0).contains(g)) {
        return Err(Error::domain("power parameters must lie in [0, 1]"));
    }
    if !vague.is_single() {
        return Err(Error::InvalidMixture("the power prior needs a single-component vague prior".into()));
    }
    if historical.family() != vague.family() {
        return Err(Error::FamilyMismatch {
            expected: vague.family(),
            found: historical.family(),
        });
    }
    let conditional: Vec<Component> = match (vague.components()[0], historical) {
        (Component::Beta(base), TrialData::Binary(h)) => gammas
            .iter()
            .map(|g| {
                BetaComponent::new(base.a() + g * h.x() as f64, base.b() + g * h.failures() as f64).map(Component::Beta)
            })
            .collect::<Result<_>>()?,
        (Component::Normal(base), TrialData::Normal(h)) => {
            let sigma = sigma_hat.ok_or_else(|| Error::domain("normal power prior requires sigma_hat"))?;
            let var = sigma * sigma;
            gammas
                .iter()
                .map(|g| {
                    let hist_precision = g * h.n() as f64 / var;
                    let precision = 1.0 / base.v() + hist_precision;
                    let m = (base.m() / base.v() + hist_precision * h.mean()) / precision;
                    NormalComponent::new(m, 1.0 / precision).map(Component::Normal)
                })
                .collect::<Result<_>>()?
        }
        _ => unreachable!("families checked"),
    };
    let uniform = 1.0 / gammas.len() as f64;
    let prior = MixtureDistribution::from_parts_unchecked(vague.family(), vec![uniform; gammas.len()], conditional);
    prior.update(data, sigma_hat.map(|s| s * s))
}
