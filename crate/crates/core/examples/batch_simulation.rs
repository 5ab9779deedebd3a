//! A batch run from JSON: calibrate each design once, then report operating
//! characteristics for every scenario, in the same wire formats the CLI writes.

use sam_prior::report::{calibration_csv, oc_csv};
use sam_prior::{simulate_batch, BatchConfig, Engine};

const CONFIG: &str = r#"{
    "scenarios": [
        {"label": "2.1", "endpoint": "normal", "theta_h": 0.0, "n_h": 60, "sigma": 3.0, "theta": 0.0, "n": 30, "theta_t": 0.0, "n_t": 60, "delta": 1.5},
        {"label": "2.2", "endpoint": "normal", "theta_h": 0.0, "n_h": 60, "sigma": 3.0, "theta": 0.0, "n": 30, "theta_t": 1.5, "n_t": 60, "delta": 1.5},
        {"label": "2.5", "endpoint": "normal", "theta_h": 0.0, "n_h": 60, "sigma": 3.0, "theta": 1.5, "n": 30, "theta_t": 1.5, "n_t": 60, "delta": 1.5}
    ],
    "methods": [{"kind": "sam"}, {"kind": "mix", "w_tilde": 0.5}, {"kind": "pp"}],
    "calibration_replicates": 1000,
    "replicates": 400,
    "seed": 2023
}"#;

fn main() -> sam_prior::Result<()> {
    let config = BatchConfig::from_json(CONFIG)?;
    config.validate()?;
    let report = simulate_batch(&Engine::new().with_threads(4)?, &config)?;
    print!("{}", calibration_csv(&report.calibrations)?);
    println!();
    print!("{}", oc_csv(&report.results)?);
    Ok(())
}
