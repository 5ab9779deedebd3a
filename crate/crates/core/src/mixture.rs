//! Weighted mixtures of Beta or Normal conjugate components.
//!
//! Marginal likelihoods follow one convention throughout: the binomial
//! coefficient is dropped from the Beta-binomial marginal and the Normal
//! marginal is the density of the sample mean alone. Both conventions add the
//! same constant to every component's log marginal, which cancels when
//! mixture weights are renormalized.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::special::{beta_inc_reg, ln_beta_unchecked, ln_norm_pdf, log_sum_exp, norm_cdf};

/// Tolerance accepted on the weight sum of externally supplied mixtures before renormalizing.
const INPUT_WEIGHT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Beta,
    Normal,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Beta => f.write_str("beta"),
            Family::Normal => f.write_str("normal"),
        }
    }
}

/// Responses `x` out of `n` subjects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct BinarySummary {
    x: u64,
    n: u64,
}

impl BinarySummary {
    pub fn new(x: u64, n: u64) -> Result<Self> {
        if x > n {
            return Err(Error::InvalidData(format!("responses x={x} exceed subjects n={n}")));
        }
        Ok(Self { x, n })
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn failures(&self) -> u64 {
        self.n - self.x
    }

    /// Pools two independent samples.
    pub fn pool(&self, other: &Self) -> Self {
        Self {
            x: self.x + other.x,
            n: self.n + other.n,
        }
    }
}

/// Sufficient statistics of a continuous sample: size, mean and standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalSummary {
    n: u64,
    mean: f64,
    sd: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    sum_sq_dev: Option<f64>,
}

impl NormalSummary {
    pub fn new(n: u64, mean: f64, sd: f64) -> Result<Self> {
        Self::with_sum_sq_dev(n, mean, sd, None)
    }

    pub fn with_sum_sq_dev(n: u64, mean: f64, sd: f64, sum_sq_dev: Option<f64>) -> Result<Self> {
        if !mean.is_finite() || !sd.is_finite() {
            return Err(Error::InvalidData("mean and sd must be finite".into()));
        }
        if sd < 0.0 || (n >= 2 && sd <= 0.0) {
            return Err(Error::InvalidData(format!("sd must be positive for n={n}, got {sd}")));
        }
        if let Some(ss) = sum_sq_dev {
            if !(ss.is_finite() && ss >= 0.0) {
                return Err(Error::InvalidData("sum_sq_dev must be non-negative".into()));
            }
            let implied = n.saturating_sub(1) as f64 * sd * sd;
            if (ss - implied).abs() > 1e-9 * implied.max(1.0) {
                return Err(Error::InvalidData(format!(
                    "sum_sq_dev {ss} disagrees with (n-1)*sd^2 = {implied}"
                )));
            }
        }
        Ok(Self { n, mean, sd, sum_sq_dev })
    }

    /// Summarizes raw observations (sample sd with `n - 1` denominator).
    pub fn from_observations(ys: &[f64]) -> Result<Self> {
        let n = ys.len();
        if n == 0 {
            return Self::new(0, 0.0, 0.0);
        }
        let mean = ys.iter().sum::<f64>() / n as f64;
        let ss: f64 = ys.iter().map(|y| (y - mean) * (y - mean)).sum();
        let sd = if n >= 2 { (ss / (n - 1) as f64).sqrt() } else { 0.0 };
        Self::with_sum_sq_dev(n as u64, mean, sd, Some(ss))
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }

    pub fn variance(&self) -> f64 {
        self.sd * self.sd
    }

    pub fn sum_sq_dev(&self) -> f64 {
        self.sum_sq_dev
            .unwrap_or_else(|| self.n.saturating_sub(1) as f64 * self.sd * self.sd)
    }

    /// Pools two independent samples into one summary.
    pub fn pool(&self, other: &Self) -> Self {
        let n = self.n + other.n;
        if n == 0 {
            return *self;
        }
        let (n1, n2) = (self.n as f64, other.n as f64);
        let mean = (n1 * self.mean + n2 * other.mean) / n as f64;
        let d = self.mean - other.mean;
        let ss = self.sum_sq_dev() + other.sum_sq_dev() + d * d * n1 * n2 / n as f64;
        let sd = if n >= 2 { (ss / (n - 1) as f64).sqrt() } else { 0.0 };
        Self {
            n,
            mean,
            sd,
            sum_sq_dev: Some(ss),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBinarySummary {
    x: u64,
    n: u64,
}

impl<'de> Deserialize<'de> for BinarySummary {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = RawBinarySummary::deserialize(de)?;
        BinarySummary::new(raw.x, raw.n).map_err(serde::de::Error::custom)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNormalSummary {
    n: u64,
    mean: f64,
    sd: f64,
    #[serde(default)]
    sum_sq_dev: Option<f64>,
}

impl<'de> Deserialize<'de> for NormalSummary {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = RawNormalSummary::deserialize(de)?;
        NormalSummary::with_sum_sq_dev(raw.n, raw.mean, raw.sd, raw.sum_sq_dev).map_err(serde::de::Error::custom)
    }
}

/// Observed data for one arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TrialData {
    Binary(BinarySummary),
    Normal(NormalSummary),
}

impl TrialData {
    pub fn family(&self) -> Family {
        match self {
            TrialData::Binary(_) => Family::Beta,
            TrialData::Normal(_) => Family::Normal,
        }
    }

    pub fn n(&self) -> u64 {
        match self {
            TrialData::Binary(d) => d.n(),
            TrialData::Normal(d) => d.n(),
        }
    }
}

impl From<BinarySummary> for TrialData {
    fn from(d: BinarySummary) -> Self {
        TrialData::Binary(d)
    }
}

impl From<NormalSummary> for TrialData {
    fn from(d: NormalSummary) -> Self {
        TrialData::Normal(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaComponent {
    a: f64,
    b: f64,
}

impl BetaComponent {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
            return Err(Error::InvalidMixture(format!(
                "beta shapes must be finite and positive, got ({a}, {b})"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn uniform() -> Self {
        Self { a: 1.0, b: 1.0 }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn mean(&self) -> f64 {
        self.a / (self.a + self.b)
    }

    pub fn variance(&self) -> f64 {
        let s = self.a + self.b;
        self.a * self.b / (s * s * (s + 1.0))
    }

    pub fn ln_beta(&self) -> f64 {
        ln_beta_unchecked(self.a, self.b)
    }

    pub fn ln_pdf(&self, u: f64) -> f64 {
        self.ln_pdf_with(u, self.ln_beta())
    }

    pub(crate) fn ln_pdf_with(&self, u: f64, ln_b: f64) -> f64 {
        if u <= 0.0 || u >= 1.0 {
            return f64::NEG_INFINITY;
        }
        (self.a - 1.0) * u.ln() + (self.b - 1.0) * (-u).ln_1p() - ln_b
    }

    pub fn cdf(&self, t: f64) -> f64 {
        beta_inc_reg(self.a, self.b, self.ln_beta(), t)
    }

    pub(crate) fn cdf_with(&self, t: f64, ln_b: f64) -> f64 {
        beta_inc_reg(self.a, self.b, ln_b, t)
    }

    /// `ln[B(a+x, b+n-x) / B(a, b)]`: the Beta-binomial marginal without its binomial coefficient.
    pub fn log_marginal(&self, data: &BinarySummary) -> f64 {
        if data.n == 0 {
            return 0.0;
        }
        ln_beta_unchecked(self.a + data.x as f64, self.b + data.failures() as f64) - self.ln_beta()
    }

    pub fn update(&self, data: &BinarySummary) -> Self {
        Self {
            a: self.a + data.x as f64,
            b: self.b + data.failures() as f64,
        }
    }
}

/// Normal component with location `m` and variance `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalComponent {
    m: f64,
    v: f64,
}

impl NormalComponent {
    pub fn new(m: f64, v: f64) -> Result<Self> {
        if !(m.is_finite() && v.is_finite() && v > 0.0) {
            return Err(Error::InvalidMixture(format!(
                "normal component needs finite mean and positive variance, got ({m}, {v})"
            )));
        }
        Ok(Self { m, v })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn sd(&self) -> f64 {
        self.v.sqrt()
    }

    pub fn ln_pdf(&self, t: f64) -> f64 {
        ln_norm_pdf(t, self.m, self.v)
    }

    pub fn cdf(&self, t: f64) -> f64 {
        norm_cdf((t - self.m) / self.sd())
    }

    /// Log density of the sample mean under `ȳ ~ Normal(m, v + σ²/n)`; zero for empty data.
    pub fn log_marginal(&self, data: &NormalSummary, sampling_var: f64) -> f64 {
        if data.n == 0 {
            return 0.0;
        }
        ln_norm_pdf(data.mean, self.m, self.v + sampling_var / data.n as f64)
    }

    /// Known-variance conjugate update by precision addition.
    pub fn update(&self, data: &NormalSummary, sampling_var: f64) -> Self {
        if data.n == 0 {
            return *self;
        }
        let data_precision = data.n as f64 / sampling_var;
        let precision = 1.0 / self.v + data_precision;
        let m = (self.m / self.v + data_precision * data.mean) / precision;
        Self { m, v: 1.0 / precision }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Component {
    Beta(BetaComponent),
    Normal(NormalComponent),
}

impl Component {
    pub fn family(&self) -> Family {
        match self {
            Component::Beta(_) => Family::Beta,
            Component::Normal(_) => Family::Normal,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Component::Beta(c) => c.mean(),
            Component::Normal(c) => c.m,
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            Component::Beta(c) => c.variance(),
            Component::Normal(c) => c.v,
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        match self {
            Component::Beta(c) => c.cdf(t),
            Component::Normal(c) => c.cdf(t),
        }
    }

    pub fn ln_pdf(&self, t: f64) -> f64 {
        match self {
            Component::Beta(c) => c.ln_pdf(t),
            Component::Normal(c) => c.ln_pdf(t),
        }
    }
}

impl From<BetaComponent> for Component {
    fn from(c: BetaComponent) -> Self {
        Component::Beta(c)
    }
}

impl From<NormalComponent> for Component {
    fn from(c: NormalComponent) -> Self {
        Component::Normal(c)
    }
}

/// A finite mixture of same-family conjugate components; weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureDistribution {
    family: Family,
    weights: Vec<f64>,
    components: Vec<Component>,
}

impl MixtureDistribution {
    /// Builds a mixture from `(weight, component)` pairs. Weights must be
    /// non-negative and sum to one within 1e-9; they are renormalized exactly.
    pub fn new<C: Into<Component>>(parts: impl IntoIterator<Item = (f64, C)>) -> Result<Self> {
        let (weights, components): (Vec<f64>, Vec<Component>) =
            parts.into_iter().map(|(w, c)| (w, c.into())).unzip();
        let Some(first) = components.first() else {
            return Err(Error::InvalidMixture("a mixture needs at least one component".into()));
        };
        let family = first.family();
        if let Some(c) = components.iter().find(|c| c.family() != family) {
            return Err(Error::FamilyMismatch {
                expected: family,
                found: c.family(),
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidMixture("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > INPUT_WEIGHT_TOL {
            return Err(Error::InvalidMixture(format!("weights sum to {total}, expected 1")));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self {
            family,
            weights,
            components,
        })
    }

    pub fn single<C: Into<Component>>(component: C) -> Self {
        let component = component.into();
        Self {
            family: component.family(),
            weights: vec![1.0],
            components: vec![component],
        }
    }

    /// Mixture from log-scale unnormalized weights, normalized with log-sum-exp.
    pub(crate) fn from_log_weights(family: Family, log_weights: &[f64], components: Vec<Component>) -> Self {
        let lse = log_sum_exp(log_weights);
        let weights = log_weights.iter().map(|lw| (lw - lse).exp()).collect();
        Self {
            family,
            weights,
            components,
        }
    }

    pub(crate) fn from_parts_unchecked(family: Family, weights: Vec<f64>, components: Vec<Component>) -> Self {
        Self {
            family,
            weights,
            components,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &Component)> + '_ {
        self.weights.iter().copied().zip(self.components.iter())
    }

    pub fn is_single(&self) -> bool {
        self.components.len() == 1
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(w, c)| w * c.mean()).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.iter()
            .map(|(w, c)| {
                let d = c.mean() - mean;
                w * (c.variance() + d * d)
            })
            .sum()
    }

    pub fn cdf(&self, t: f64) -> f64 {
        self.iter().map(|(w, c)| w * c.cdf(t)).sum::<f64>().clamp(0.0, 1.0)
    }

    pub fn pdf(&self, t: f64) -> f64 {
        self.iter().map(|(w, c)| w * c.ln_pdf(t).exp()).sum()
    }

    /// Inverse CDF by bisection.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!("quantile requires 0 < p < 1, got {p}")));
        }
        let (mut lo, mut hi) = match self.family {
            Family::Beta => (0.0, 1.0),
            Family::Normal => {
                let lo = self
                    .components
                    .iter()
                    .map(|c| c.mean() - 50.0 * c.variance().sqrt())
                    .fold(f64::INFINITY, f64::min);
                let hi = self
                    .components
                    .iter()
                    .map(|c| c.mean() + 50.0 * c.variance().sqrt())
                    .fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
        };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Conjugate update of every component, reweighting by each component's
    /// marginal likelihood. `sampling_var` is the per-observation variance,
    /// treated as known, and is required for Normal mixtures.
    pub fn update(&self, data: &TrialData, sampling_var: Option<f64>) -> Result<Self> {
        if data.family() != self.family {
            return Err(Error::FamilyMismatch {
                expected: self.family,
                found: data.family(),
            });
        }
        let mut log_weights = Vec::with_capacity(self.len());
        let mut components = Vec::with_capacity(self.len());
        match data {
            TrialData::Binary(d) => {
                for (w, c) in self.iter() {
                    let Component::Beta(c) = c else { unreachable!("family checked") };
                    log_weights.push(w.ln() + c.log_marginal(d));
                    components.push(Component::Beta(c.update(d)));
                }
            }
            TrialData::Normal(d) => {
                let var = match sampling_var {
                    Some(v) if v.is_finite() && v > 0.0 => v,
                    Some(v) => return Err(Error::domain(format!("sampling variance must be positive, got {v}"))),
                    None if d.n() == 0 => 1.0,
                    None => return Err(Error::domain("normal updating requires a sampling variance")),
                };
                for (w, c) in self.iter() {
                    let Component::Normal(c) = c else { unreachable!("family checked") };
                    log_weights.push(w.ln() + c.log_marginal(d, var));
                    components.push(Component::Normal(c.update(d, var)));
                }
            }
        }
        Ok(Self::from_log_weights(self.family, &log_weights, components))
    }
}

/// `ln B(a, b)`; see [`crate::special::ln_beta`].
pub fn log_beta_function(a: f64, b: f64) -> Result<f64> {
    crate::special::ln_beta(a, b)
}

/// Log marginal likelihood of binary data under one Beta component (binomial coefficient omitted).
pub fn beta_log_marginal(prior: &BetaComponent, data: &BinarySummary) -> f64 {
    prior.log_marginal(data)
}

/// Log density of the sample mean under one Normal component with known sampling variance.
pub fn normal_log_marginal(prior: &NormalComponent, data: &NormalSummary, sampling_var: f64) -> Result<f64> {
    if !(sampling_var.is_finite() && sampling_var > 0.0) {
        return Err(Error::domain(format!("sampling variance must be positive, got {sampling_var}")));
    }
    Ok(prior.log_marginal(data, sampling_var))
}

pub fn mixture_update(prior: &MixtureDistribution, data: &TrialData, sampling_var: Option<f64>) -> Result<MixtureDistribution> {
    prior.update(data, sampling_var)
}

pub fn mixture_mean(d: &MixtureDistribution) -> f64 {
    d.mean()
}

pub fn mixture_cdf(d: &MixtureDistribution, t: f64) -> f64 {
    d.cdf(t)
}

pub fn mixture_quantile(d: &MixtureDistribution, p: f64) -> Result<f64> {
    d.quantile(p)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponent {
    w: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    v: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMixture {
    family: Family,
    components: Vec<RawComponent>,
}

impl Serialize for MixtureDistribution {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let components = self
            .iter()
            .map(|(w, c)| match c {
                Component::Beta(c) => RawComponent {
                    w,
                    a: Some(c.a),
                    b: Some(c.b),
                    m: None,
                    v: None,
                },
                Component::Normal(c) => RawComponent {
                    w,
                    a: None,
                    b: None,
                    m: Some(c.m),
                    v: Some(c.v),
                },
            })
            .collect();
        RawMixture {
            family: self.family,
            components,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for MixtureDistribution {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawMixture::deserialize(de)?;
        let mut parts = Vec::with_capacity(raw.components.len());
        for (i, rc) in raw.components.into_iter().enumerate() {
            let component: Component = match raw.family {
                Family::Beta => match (rc.a, rc.b, rc.m, rc.v) {
                    (Some(a), Some(b), None, None) => BetaComponent::new(a, b).map_err(D::Error::custom)?.into(),
                    _ => return Err(D::Error::custom(format!("component {i}: beta components need exactly `a` and `b`"))),
                },
                Family::Normal => match (rc.a, rc.b, rc.m, rc.v) {
                    (None, None, Some(m), Some(v)) => NormalComponent::new(m, v).map_err(D::Error::custom)?.into(),
                    _ => return Err(D::Error::custom(format!("component {i}: normal components need exactly `m` and `v`"))),
                },
            };
            parts.push((rc.w, component));
        }
        MixtureDistribution::new(parts).map_err(D::Error::custom)
    }
}
