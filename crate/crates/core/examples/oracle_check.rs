//! Validate the block-diagonal probability engine against a brute-force
//! computation on the full 2^N-dimensional space.
//!
//! Run with: cargo run --release --example oracle_check

use ghz_aic::measurement::{generate_plan, outcome_distribution};
use ghz_aic::oracle::{brute_distribution, embed_with, SchurBasis};
use ghz_aic::pi_state::random_pi_state;

fn main() -> ghz_aic::Result<()> {
    let mut worst = 0.0f64;
    for n in 2..=6usize {
        let basis = SchurBasis::new(n)?;
        let plan = generate_plan(n);
        let mut n_worst = 0.0f64;
        for seed in 0..10u64 {
            let state = random_pi_state(n, seed)?;
            let dense = embed_with(&basis, &state)?;
            for setting in plan.settings().iter().take(10) {
                let fast = outcome_distribution(&state, setting)?;
                let slow = brute_distribution(&dense, setting)?;
                for (a, b) in fast.iter().zip(&slow) {
                    n_worst = n_worst.max((a - b).abs());
                }
            }
        }
        println!("N = {n}: max |p_block - p_brute| = {n_worst:.3e} over 10 states x 10 settings");
        worst = worst.max(n_worst);
    }
    println!(
        "\noverall max deviation {worst:.3e} -> {}",
        if worst < 1e-9 { "OK" } else { "MISMATCH" }
    );
    Ok(())
}
