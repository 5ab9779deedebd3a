//! Posterior probability that the treatment parameter exceeds the control
//! parameter, and the cutoff rule built on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::{BetaComponent, Component, MixtureDistribution};
use crate::quadrature::integrate;
use crate::special::norm_cdf;

const PAIR_ABS_TOL: f64 = 1e-10;
const MAX_PIECES: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionResult {
    pub prob_superiority: f64,
    pub cutoff: f64,
    pub reject: bool,
    pub control_mean: f64,
    pub treatment_mean: f64,
}

impl DecisionResult {
    pub fn new(post_t: &MixtureDistribution, post_c: &MixtureDistribution, cutoff: f64) -> Result<Self> {
        let prob = prob_superiority(post_t, post_c)?;
        Ok(Self {
            prob_superiority: prob,
            cutoff,
            reject: decide(prob, cutoff),
            control_mean: post_c.mean(),
            treatment_mean: post_t.mean(),
        })
    }
}

/// Treatment is declared superior only when the probability strictly exceeds the cutoff.
pub fn decide(prob: f64, cutoff: f64) -> bool {
    prob > cutoff
}

pub fn posterior_point_estimate(post: &MixtureDistribution) -> f64 {
    post.mean()
}

/// `Pr(θ_t > θ_c)` for independent mixture posteriors of the same family.
pub fn prob_superiority(post_t: &MixtureDistribution, post_c: &MixtureDistribution) -> Result<f64> {
    if post_t.family() != post_c.family() {
        return Err(Error::FamilyMismatch {
            expected: post_c.family(),
            found: post_t.family(),
        });
    }
    let p = match post_t.components()[0] {
        Component::Normal(_) => normal_superiority(post_t, post_c),
        Component::Beta(_) => beta_superiority(post_t, post_c),
    };
    Ok(p.clamp(0.0, 1.0))
}

fn normal_superiority(post_t: &MixtureDistribution, post_c: &MixtureDistribution) -> f64 {
    let mut total = 0.0;
    for (wt, t) in post_t.iter() {
        for (wc, c) in post_c.iter() {
            let (Component::Normal(t), Component::Normal(c)) = (t, c) else { unreachable!() };
            total += wt * wc * norm_cdf((t.m() - c.m()) / (t.v() + c.v()).sqrt());
        }
    }
    total
}

struct Prepared {
    weight: f64,
    comp: BetaComponent,
    ln_b: f64,
}

fn prepare(d: &MixtureDistribution) -> Vec<Prepared> {
    d.iter()
        .map(|(w, c)| {
            let Component::Beta(c) = c else { unreachable!() };
            Prepared {
                weight: w,
                comp: *c,
                ln_b: c.ln_beta(),
            }
        })
        .collect()
}

/// Σ_j Σ_k w_j w_k P(X_j > Y_k), grouped so that only one quadrature is run
/// per component of the arm with fewer components: the other arm enters
/// through its full mixture density.
fn beta_superiority(post_t: &MixtureDistribution, post_c: &MixtureDistribution) -> f64 {
    let treat = prepare(post_t);
    let ctrl = prepare(post_c);
    if treat.len() <= ctrl.len() {
        // Pr(T > C) = Σ_j w_j ∫ f_C(u) (1 - F_Tj(u)) du
        treat
            .iter()
            .map(|t| t.weight * density_times_cdf(&ctrl, t, true))
            .sum()
    } else {
        // Pr(T > C) = Σ_k w_k ∫ f_T(u) F_Ck(u) du
        ctrl.iter()
            .map(|c| c.weight * density_times_cdf(&treat, c, false))
            .sum()
    }
}

/// `∫₀¹ f_mix(u) · G(u) du` where `G` is the CDF of `cdf_comp` (or its
/// survival function when `survival` is set).
fn density_times_cdf(mix: &[Prepared], cdf_comp: &Prepared, survival: bool) -> f64 {
    let cdf_factor = |u: f64| {
        let f = cdf_comp.comp.cdf_with(u, cdf_comp.ln_b);
        if survival {
            1.0 - f
        } else {
            f
        }
    };
    let integrand = |u: f64| {
        let density: f64 = mix
            .iter()
            .map(|p| p.weight * p.comp.ln_pdf_with(u, p.ln_b).exp())
            .sum();
        if density == 0.0 {
            return 0.0;
        }
        density * cdf_factor(u)
    };
    let breaks = breakpoints(mix, &cdf_comp.comp);
    let live = || mix.iter().filter(|p| p.weight > 0.0);
    let a_min = live().map(|p| p.comp.a()).fold(f64::INFINITY, f64::min);
    let b_min = live().map(|p| p.comp.b()).fold(f64::INFINITY, f64::min);
    if a_min >= 1.0 && b_min >= 1.0 {
        return integrate(integrand, &breaks, PAIR_ABS_TOL, MAX_PIECES).value;
    }

    // A shape below one makes the density unbounded at that end. Each half is
    // integrated over s with u = ½ sᵐ (or 1 - u = ½ sᵐ) and m = 1 / shape,
    // which leaves a bounded integrand.
    let edge = |shape: f64, left_edge: bool, range: (f64, f64)| -> f64 {
        let m = if shape < 1.0 { 1.0 / shape } else { 1.0 };
        let ln_c = -std::f64::consts::LN_2;
        let g = |s: f64| {
            if s <= 0.0 {
                return 0.0;
            }
            let ln_gap = ln_c + m * s.ln();
            let gap = ln_gap.exp();
            let ln_far = (-gap).ln_1p();
            let (ln_u, ln_1mu) = if left_edge { (ln_gap, ln_far) } else { (ln_far, ln_gap) };
            let jac = ln_c + m.ln() + (m - 1.0) * s.ln();
            let density: f64 = mix
                .iter()
                .map(|p| p.weight * ((p.comp.a() - 1.0) * ln_u + (p.comp.b() - 1.0) * ln_1mu - p.ln_b + jac).exp())
                .sum();
            if density == 0.0 {
                return 0.0;
            }
            let u = if left_edge { gap } else { 1.0 - gap };
            density * cdf_factor(u)
        };
        let to_s = |u: f64| {
            let gap = if left_edge { u } else { 1.0 - u };
            (2.0 * gap).powf(1.0 / m).clamp(0.0, 1.0)
        };
        let mut pts: Vec<f64> = breaks.iter().copied().filter(|u| *u >= range.0 && *u <= range.1).map(to_s).collect();
        pts.extend([0.0, 1.0]);
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        integrate(g, &pts, 0.5 * PAIR_ABS_TOL, MAX_PIECES).value
    };
    edge(a_min, true, (0.0, 0.5)) + edge(b_min, false, (0.5, 1.0))
}

/// Initial partition of `[0, 1]`: the hull of the mass of the density-side
/// mixture split evenly, plus points around the CDF component's bulk.
fn breakpoints(mix: &[Prepared], cdf_comp: &BetaComponent) -> Vec<f64> {
    let mut pts = vec![0.0, 1.0];
    let (mut lo, mut hi) = (1.0f64, 0.0f64);
    for p in mix.iter().filter(|p| p.weight > 1e-14) {
        let (m, s) = (p.comp.mean(), p.comp.variance().sqrt());
        lo = lo.min(m - 10.0 * s);
        hi = hi.max(m + 10.0 * s);
    }
    let lo = lo.max(0.0);
    let hi = hi.min(1.0);
    if hi > lo {
        const SPLITS: usize = 12;
        for i in 0..=SPLITS {
            pts.push(lo + (hi - lo) * i as f64 / SPLITS as f64);
        }
    }
    let (m, s) = (cdf_comp.mean(), cdf_comp.variance().sqrt());
    for k in [-6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0] {
        pts.push(m + k * s);
    }
    pts.retain(|x| (0.0..=1.0).contains(x));
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    pts
}
