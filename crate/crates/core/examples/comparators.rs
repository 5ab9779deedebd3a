//! Control-arm posteriors under the vague prior, fixed-weight mixtures, the
//! SAM prior and the normalized power prior, for congruent and conflicting data.

use sam_prior::{
    fixed_mixture_posterior, np_posterior, power_prior_posterior, sam_posterior, BetaComponent, BinarySummary, MixtureDistribution,
    TrialData,
};

fn main() -> sam_prior::Result<()> {
    let vague = MixtureDistribution::single(BetaComponent::uniform());
    let historical: TrialData = BinarySummary::new(120, 300)?.into();
    let informative = vague.update(&historical, None)?;

    println!("{:>8} {:>8} {:>8} {:>8} {:>8} {:>8}", "x/150", "NP", "Mix50", "Mix90", "SAM", "PP");
    for x in [60, 68, 75, 90] {
        let data: TrialData = BinarySummary::new(x, 150)?.into();
        let np = np_posterior(&vague, &data, None)?;
        let mix50 = fixed_mixture_posterior(&informative, &vague, 0.5, &data, None)?;
        let mix90 = fixed_mixture_posterior(&informative, &vague, 0.9, &data, None)?;
        let (sam, _) = sam_posterior(&informative, &vague, 0.1, &data, None)?;
        let pp = power_prior_posterior(&vague, &historical, &data, 101, None)?;
        println!(
            "{:>8} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            format!("{x}"),
            np.mean(),
            mix50.mean(),
            mix90.mean(),
            sam.mean(),
            pp.mean()
        );
    }
    Ok(())
}
