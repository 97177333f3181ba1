//! Mean ΔAIC against the measurement budget M for a perturbed GHZ state,
//! with the zero crossing that marks "enough data to detect the error".
//!
//! Run with: cargo run --release --example aic_crossing

use ghz_aic::selection::{sweep, SweepConfig};

fn main() -> ghz_aic::Result<()> {
    let n = 4;
    let q = 0.05;
    let grid: Vec<u64> = (0..9).map(|i| 15 << i).collect(); // 15, 30, ..., 3840
    let reps = 20;
    let config = SweepConfig::new(n, q, grid, reps, 2024);

    println!("N = {n}, q = {q}, {reps} repetitions per grid point");
    println!("deltaAIC = AIC(3p) - AIC(PI); negative favors the 3-parameter model\n");
    let result = sweep(&config)?;
    println!("{:>8} {:>12} {:>10}", "M", "mean dAIC", "std");
    for stat in &result.stats {
        println!("{:>8} {:>12.2} {:>10.2}", stat.m, stat.mean, stat.std);
    }
    match result.crossing_m {
        Some(m) => println!("\nmean curve crosses zero near M = {m:.0}"),
        None => println!("\nno crossing on this grid"),
    }
    Ok(())
}
