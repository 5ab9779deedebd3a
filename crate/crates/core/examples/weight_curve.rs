//! Mean SAM weight as the true control rate moves away from the historical
//! estimate.

use sam_prior::{weight_curve, Endpoint, ScenarioSpec, SigmaSource};

fn main() -> sam_prior::Result<()> {
    let spec = ScenarioSpec {
        label: "curve".into(),
        endpoint: Endpoint::Binary,
        theta_h: Some(0.4),
        n_h: Some(300),
        informative: None,
        theta: 0.4,
        n: 150,
        theta_t: 0.4,
        n_t: 300,
        sigma: None,
        delta: 0.1,
        vague: None,
        sigma_source: SigmaSource::Pooled,
        methods: None,
    };
    let grid: Vec<f64> = (0..=20).map(|i| 0.2 + 0.02 * i as f64).collect();
    for p in weight_curve(&spec, &grid, 400, 5)? {
        let bar = "#".repeat((p.mean_w * 50.0).round() as usize);
        println!("{:.2} {:.3} {bar}", p.theta, p.mean_w);
    }
    Ok(())
}
