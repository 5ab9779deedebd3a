//! Conjugate updating of a two-component Beta mixture (a meta-analytic
//! predictive prior) with observed control-arm data.

use sam_prior::{mixture_quantile, BetaComponent, BinarySummary, MixtureDistribution, TrialData};

fn main() -> sam_prior::Result<()> {
    let prior = MixtureDistribution::new([
        (0.63, BetaComponent::new(42.5, 77.2)?),
        (0.37, BetaComponent::new(7.2, 12.4)?),
    ])?;
    println!("prior mean {:.4}, sd {:.4}", prior.mean(), prior.variance().sqrt());

    for (x, n) in [(12, 35), (20, 35), (5, 35)] {
        let data = TrialData::from(BinarySummary::new(x, n)?);
        let post = prior.update(&data, None)?;
        let lo = mixture_quantile(&post, 0.025)?;
        let hi = mixture_quantile(&post, 0.975)?;
        println!("x={x:>2}/{n}: mean {:.4}  95% CrI [{lo:.4}, {hi:.4}]  weights {:?}", post.mean(), round(post.weights()));
    }
    Ok(())
}

fn round(w: &[f64]) -> Vec<f64> {
    w.iter().map(|v| (v * 1e4).round() / 1e4).collect()
}
