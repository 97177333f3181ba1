//! How many measurements it takes to detect a wrong-type error of strength
//! q: smaller perturbations need more data, but less than quadratically in
//! 1/q.
//!
//! Run with: cargo run --release --example perturbation_scaling

use ghz_aic::selection::{linear_fit, scaling_in_q, ScalingConfig};

fn main() -> ghz_aic::Result<()> {
    let n = 4;
    let q_list = [0.04, 0.08, 0.16, 0.32];
    let scaling = ScalingConfig::new(15, 11);

    println!("N = {n}, {} repetitions per point\n", scaling.repetitions);
    let points = scaling_in_q(n, &q_list, &scaling, None)?;
    let mut log_inv_q = Vec::new();
    let mut log_m = Vec::new();
    for p in &points {
        match p.crossing_m {
            Some(m) => {
                println!("q = {:>5.2}: crossing at M ≈ {m:.0}", p.x);
                log_inv_q.push((1.0 / p.x).ln());
                log_m.push(m.ln());
            }
            None => println!("q = {:>5.2}: censored (ceiling reached)", p.x),
        }
    }
    if log_m.len() >= 2 {
        let (slope, _, r2) = linear_fit(&log_inv_q, &log_m);
        println!("\nlog-log slope of crossing vs 1/q: {slope:.2} (R² = {r2:.3})");
        println!("below 2 means cheaper than quadratic in 1/q");
    }
    Ok(())
}
