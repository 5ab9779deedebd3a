//! Type I error, power, bias and MSE for several methods across a small grid
//! of scenarios, written as CSV.

use sam_prior::report::oc_csv;
use sam_prior::{Endpoint, Engine, MethodSpec, ScenarioSpec, SigmaSource};

fn scenario(label: &str, theta: f64, theta_t: f64) -> ScenarioSpec {
    ScenarioSpec {
        label: label.into(),
        endpoint: Endpoint::Binary,
        theta_h: Some(0.4),
        n_h: Some(300),
        informative: None,
        theta,
        n: 150,
        theta_t,
        n_t: 300,
        sigma: None,
        delta: 0.1,
        vague: None,
        sigma_source: SigmaSource::Pooled,
        methods: None,
    }
}

fn main() -> sam_prior::Result<()> {
    let engine = Engine::new();
    let methods = [MethodSpec::Sam, MethodSpec::mix(0.5), MethodSpec::Np];
    let null = scenario("null", 0.4, 0.4);
    let cutoffs = methods
        .iter()
        .map(|m| engine.calibrate_cutoff(&null, m, 0.05, 1000, 1).map(|c| c.cutoff))
        .collect::<sam_prior::Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for spec in [null, scenario("effect", 0.4, 0.5), scenario("drift", 0.5, 0.5), scenario("drift+effect", 0.3, 0.4)] {
        rows.extend(engine.run_oc(&spec, &methods, &cutoffs, 500, 2)?);
    }
    print!("{}", oc_csv(&rows)?);
    Ok(())
}
