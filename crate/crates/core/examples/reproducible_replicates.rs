//! Replicate data are a pure function of (seed, replicate index), so any single
//! replicate can be regenerated without rerunning the rest.

use sam_prior::simulation::StreamPurpose;
use sam_prior::{build_historical, generate_replicate, Endpoint, ScenarioSpec, SigmaSource, TrialData};

fn main() -> sam_prior::Result<()> {
    let spec = ScenarioSpec {
        label: "normal".into(),
        endpoint: Endpoint::Normal,
        theta_h: Some(0.0),
        n_h: Some(60),
        informative: None,
        theta: 0.0,
        n: 30,
        theta_t: 1.5,
        n_t: 60,
        sigma: Some(3.0),
        delta: 1.5,
        vague: None,
        sigma_source: SigmaSource::Pooled,
        methods: None,
    };
    println!("historical: {:?}", build_historical(&spec)?);
    for r in [0, 1, 999] {
        let (c, t) = generate_replicate(&spec, 42, StreamPurpose::Simulation, r)?;
        let again = generate_replicate(&spec, 42, StreamPurpose::Simulation, r)?;
        assert_eq!((c, t), again);
        if let (TrialData::Normal(c), TrialData::Normal(t)) = (c, t) {
            println!("replicate {r:>3}: control mean {:+.4} (sd {:.4}), treatment mean {:+.4}", c.mean(), c.sd(), t.mean());
        }
    }
    Ok(())
}
