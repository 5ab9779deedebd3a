//! Self-adapting mixture prior: the likelihood-ratio statistic, the mixing
//! weight derived from it, and the posterior under the resulting mixture.
//!
//! The statistic compares the likelihood of the current control data at the
//! historical estimate `θ̂_h` against the better of the two conflict
//! alternatives `θ̂_h ± δ`:
//!
//! ```text
//! log R = ln p(D | θ̂_h) - max{ ln p(D | θ̂_h + δ), ln p(D | θ̂_h - δ) }
//! w     = R / (1 + R)
//! ```
//!
//! and the prior is `w · informative + (1 - w) · vague`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::{BinarySummary, Family, MixtureDistribution, NormalSummary, TrialData};

/// `log_r` is clamped to this magnitude before the logistic transform.
pub const LOG_R_CLAMP: f64 = 745.0;

/// Which conflict alternative attained the maximum in the denominator of `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamWeight {
    pub log_r: f64,
    pub w: f64,
    pub theta_h_hat: f64,
    pub delta: f64,
    pub side_used: Side,
}

/// Logistic transform of `log_r`, saturating to exactly 0 or 1 beyond ±745.
pub fn weight_from_log_r(log_r: f64) -> f64 {
    if log_r >= LOG_R_CLAMP {
        1.0
    } else if log_r <= -LOG_R_CLAMP {
        0.0
    } else if log_r >= 0.0 {
        1.0 / (1.0 + (-log_r).exp())
    } else {
        let e = log_r.exp();
        e / (1.0 + e)
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta.is_finite() && delta > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("delta must be positive, got {delta}")))
    }
}

/// The historical estimate implied by the informative prior: its mean.
pub fn estimate_theta_h(informative: &MixtureDistribution) -> f64 {
    informative.mean()
}

fn bernoulli_log_lik(theta: f64, data: &BinarySummary) -> f64 {
    let x = data.x() as f64;
    let f = data.failures() as f64;
    // 0·ln(0) terms vanish
    let mut ll = 0.0;
    if x > 0.0 {
        ll += x * theta.ln();
    }
    if f > 0.0 {
        ll += f * (-theta).ln_1p();
    }
    ll
}

/// Weight for binary data. Alternatives that leave `(0, 1)` are dropped from the maximum.
pub fn sam_weight_binary(theta_h_hat: f64, delta: f64, data: &BinarySummary) -> Result<SamWeight> {
    if !(theta_h_hat > 0.0 && theta_h_hat < 1.0) {
        return Err(Error::domain(format!("theta_h_hat must lie in (0, 1), got {theta_h_hat}")));
    }
    check_delta(delta)?;
    let plus = theta_h_hat + delta;
    let minus = theta_h_hat - delta;
    let plus_ll = (plus < 1.0).then(|| bernoulli_log_lik(plus, data));
    let minus_ll = (minus > 0.0).then(|| bernoulli_log_lik(minus, data));
    let (den, side_used) = match (plus_ll, minus_ll) {
        (Some(p), Some(m)) if m > p => (m, Side::Minus),
        (Some(p), _) => (p, Side::Plus),
        (None, Some(m)) => (m, Side::Minus),
        (None, None) => return Err(Error::DeltaIncompatible { theta_h_hat, delta }),
    };
    let log_r = bernoulli_log_lik(theta_h_hat, data) - den;
    Ok(SamWeight {
        log_r,
        w: weight_from_log_r(log_r),
        theta_h_hat,
        delta,
        side_used,
    })
}

/// Weight for continuous data with plug-in standard deviation `sigma_hat`.
///
/// Expanding `Σ(yᵢ - θ̂_h ∓ δ)²` around `ȳ` reduces the sum-over-observations
/// statistic to `log R = -(n δ / 2σ̂²)(2|ȳ - θ̂_h| - δ)`.
pub fn sam_weight_normal(theta_h_hat: f64, delta: f64, sigma_hat: f64, data: &NormalSummary) -> Result<SamWeight> {
    check_delta(delta)?;
    if !(sigma_hat.is_finite() && sigma_hat > 0.0) {
        return Err(Error::domain(format!("sigma_hat must be positive, got {sigma_hat}")));
    }
    if !theta_h_hat.is_finite() {
        return Err(Error::domain("theta_h_hat must be finite"));
    }
    let diff = data.mean() - theta_h_hat;
    let side_used = if diff >= 0.0 { Side::Plus } else { Side::Minus };
    let log_r = if data.n() == 0 {
        0.0
    } else {
        -(data.n() as f64 * delta / (2.0 * sigma_hat * sigma_hat)) * (2.0 * diff.abs() - delta)
    };
    Ok(SamWeight {
        log_r,
        w: weight_from_log_r(log_r),
        theta_h_hat,
        delta,
        side_used,
    })
}

/// `w · informative + (1 - w) · vague`, flattened. Components whose scaled
/// weight is exactly zero (w = 0 or w = 1) are left out.
pub fn build_sam_prior(informative: &MixtureDistribution, vague: &MixtureDistribution, w: f64) -> Result<MixtureDistribution> {
    if informative.family() != vague.family() {
        return Err(Error::FamilyMismatch {
            expected: informative.family(),
            found: vague.family(),
        });
    }
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::domain(format!("mixing weight must lie in [0, 1], got {w}")));
    }
    let scaled = informative
        .iter()
        .map(|(wk, c)| (w * wk, *c))
        .chain(vague.iter().map(|(wk, c)| ((1.0 - w) * wk, *c)))
        .filter(|(wk, _)| *wk > 0.0);
    let (weights, components): (Vec<f64>, Vec<_>) = scaled.unzip();
    Ok(MixtureDistribution::from_parts_unchecked(informative.family(), weights, components))
}

/// Computes the weight from the data, builds the SAM prior and updates it.
///
/// `sigma_hat` is required for Normal data; it drives both the weight and the
/// known-variance update.
pub fn sam_posterior(
    informative: &MixtureDistribution,
    vague: &MixtureDistribution,
    delta: f64,
    data: &TrialData,
    sigma_hat: Option<f64>,
) -> Result<(MixtureDistribution, SamWeight)> {
    let theta_h_hat = estimate_theta_h(informative);
    let weight = match (informative.family(), data) {
        (Family::Beta, TrialData::Binary(d)) => sam_weight_binary(theta_h_hat, delta, d)?,
        (Family::Normal, TrialData::Normal(d)) => {
            let sigma = sigma_hat.ok_or_else(|| Error::domain("normal SAM weight requires sigma_hat"))?;
            sam_weight_normal(theta_h_hat, delta, sigma, d)?
        }
        (expected, d) => {
            return Err(Error::FamilyMismatch {
                expected,
                found: d.family(),
            })
        }
    };
    let prior = build_sam_prior(informative, vague, weight.w)?;
    let posterior = prior.update(data, sigma_hat.map(|s| s * s))?;
    Ok((posterior, weight))
}
