//! Build noisy GHZ states, generate the D_N collective settings, and compare
//! exact outcome distributions with sampled counts.
//!
//! Run with: cargo run --release --example collective_counts

use ghz_aic::measurement::{generate_plan, outcome_distribution, sample_dataset, Setting};
use ghz_aic::pi_state::{ghz_state, three_param_state};

fn main() -> ghz_aic::Result<()> {
    let n = 5;
    let ghz = ghz_state(n)?;
    let noisy = three_param_state(n, 0.1, 0.3, 0.8)?;

    let plan = generate_plan(n);
    println!("N = {n}: D_N = {} collective settings", plan.len());

    let z = Setting::new(0.0, 0.0);
    let x = Setting::new(std::f64::consts::FRAC_PI_2, 0.0);
    println!("\nexact p(k) along z (k = outcomes along +n per shot):");
    println!("  GHZ:       {:?}", round3(&outcome_distribution(&ghz, &z)?));
    println!("  3-param:   {:?}", round3(&outcome_distribution(&noisy, &z)?));
    println!("exact p(k) along x:");
    println!("  GHZ:       {:?}", round3(&outcome_distribution(&ghz, &x)?));
    println!("  3-param:   {:?}", round3(&outcome_distribution(&noisy, &x)?));

    let shots = 100 * plan.len() as u64;
    let dataset = sample_dataset(&noisy, &plan, shots, 7)?;
    println!("\nsampled {shots} shots over all settings; first three histograms:");
    for sc in dataset.per_setting().iter().take(3) {
        println!(
            "  theta={:.3} phi={:.3}: {:?}",
            sc.setting.theta(),
            sc.setting.phi(),
            sc.histogram
        );
    }
    println!("\nCSV head:\n{}", dataset.to_csv().lines().take(4).collect::<Vec<_>>().join("\n"));
    Ok(())
}

fn round3(p: &[f64]) -> Vec<f64> {
    p.iter().map(|x| (x * 1000.0).round() / 1000.0).collect()
}
