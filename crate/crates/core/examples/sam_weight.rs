//! The SAM mixing weight as a function of the observed control data, for a
//! binary and a normal endpoint.

use sam_prior::{sam_weight_binary, sam_weight_normal, BinarySummary, NormalSummary};

fn main() -> sam_prior::Result<()> {
    let (theta_h, delta) = (0.4, 0.1);
    println!("binary, theta_h = {theta_h}, delta = {delta}, n = 150");
    for x in (30..=90).step_by(10) {
        let w = sam_weight_binary(theta_h, delta, &BinarySummary::new(x, 150)?)?;
        println!("  x = {x:>2}  log R = {:>8.3}  w = {:.4}  ({:?})", w.log_r, w.w, w.side_used);
    }

    println!("congruent data, growing n");
    for n in [100u64, 1_000, 10_000] {
        let x = (theta_h * n as f64).round() as u64;
        println!("  n = {n:>5}  w = {:.6}", sam_weight_binary(theta_h, delta, &BinarySummary::new(x, n)?)?.w);
    }

    println!("normal, theta_h = 0, delta = 1.5, sigma = 3, n = 30");
    for ybar in [0.0, 0.5, 0.75, 1.0, 1.5, 2.0] {
        let w = sam_weight_normal(0.0, 1.5, 3.0, &NormalSummary::new(30, ybar, 3.0)?)?;
        println!("  ybar = {ybar:.2}  w = {:.4}", w.w);
    }
    Ok(())
}
