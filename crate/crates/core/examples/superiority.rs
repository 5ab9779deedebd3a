//! Posterior probability that the treatment rate exceeds the control rate,
//! and the resulting go/no-go decision.

use sam_prior::{decide, prob_superiority, sam_posterior, BetaComponent, BinarySummary, DecisionResult, MixtureDistribution};

fn main() -> sam_prior::Result<()> {
    let informative = MixtureDistribution::new([
        (0.63, BetaComponent::new(42.5, 77.2)?),
        (0.37, BetaComponent::new(7.2, 12.4)?),
    ])?;
    let vague = MixtureDistribution::single(BetaComponent::uniform());

    let control = BinarySummary::new(12, 35)?.into();
    let treatment = BinarySummary::new(39, 70)?.into();
    let (post_c, weight) = sam_posterior(&informative, &vague, 0.2, &control, None)?;
    let post_t = vague.update(&treatment, None)?;

    let p = prob_superiority(&post_t, &post_c)?;
    println!("SAM weight {:.4}", weight.w);
    println!("Pr(treatment > control) = {p:.5}");
    for cutoff in [0.9, 0.95, 0.99] {
        println!("  cutoff {cutoff}: {}", if decide(p, cutoff) { "superior" } else { "not shown" });
    }
    println!("{:?}", DecisionResult::new(&post_t, &post_c, 0.95)?);
    Ok(())
}
