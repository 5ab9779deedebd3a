//! One-shot analysis of a completed trial from a JSON configuration, the same
//! path the `analyze` command and `POST /v1/analyze` take.

use sam_prior::report::to_json;
use sam_prior::{analyze, AnalyzeConfig};

const CONFIG: &str = r#"{
    "label": "application",
    "endpoint": "binary",
    "informative_prior": {"family": "beta", "components": [{"w": 0.63, "a": 42.5, "b": 77.2}, {"w": 0.37, "a": 7.2, "b": 12.4}]},
    "delta": 0.2,
    "control": {"x": 12, "n": 35},
    "treatment": {"x": 39, "n": 70},
    "methods": [{"kind": "np"}, {"kind": "sam"}, {"kind": "mix", "w_tilde": 0.5}, {"kind": "mix", "w_tilde": 0.9}],
    "cutoff": 0.95
}"#;

fn main() -> sam_prior::Result<()> {
    let report = analyze(&AnalyzeConfig::from_json(CONFIG)?)?;
    for r in &report.results {
        println!(
            "{:<6} control mean {:.4}  Pr(sup) {:.4}  reject {}",
            r.label, r.decision.control_mean, r.decision.prob_superiority, r.decision.reject
        );
    }
    println!("{}", to_json(&report)?);
    Ok(())
}
