//! Fit the 3-parameter and the full PI model to one synthetic dataset and
//! compare their maximum likelihoods.
//!
//! Run with: cargo run --release --example model_fits

use ghz_aic::estimation::{fit_pi, fit_three_param};
use ghz_aic::measurement::{generate_plan, sample_dataset};
use ghz_aic::pi_state::{
    mix_true_state, orthogonalize_to_3p, pi_param_count, random_pi_state, ThreeParamState,
};
use ghz_aic::selection::aic;

fn main() -> ghz_aic::Result<()> {
    let n = 5;
    let q = 0.05;
    let base = ThreeParamState::new(n, 0.05, 0.2, 0.9)?;
    let perturbation = orthogonalize_to_3p(&random_pi_state(n, 42)?)?;
    let truth = mix_true_state(&base, &perturbation, q)?;

    let plan = generate_plan(n);
    let shots = 2000 * plan.len() as u64;
    let dataset = sample_dataset(&truth, &plan, shots, 1)?;
    println!("true state: (eps, phi, delta) = (0.05, 0.2, 0.9) mixed with q = {q} perturbation");
    println!("dataset: N = {n}, M = {shots} shots\n");

    let three = fit_three_param(&dataset)?;
    println!(
        "3-parameter fit: eps = {:+.4}  phi = {:+.4}  delta = {:.4}",
        three.state.epsilon, three.state.phi, three.state.delta
    );
    println!(
        "  logL = {:.3}  ({} simplex iterations, converged: {})",
        three.log_likelihood, three.iterations, three.converged
    );

    let pi = fit_pi(&dataset)?;
    println!("\nPI fit over {} parameters:", pi_param_count(n));
    println!(
        "  logL = {:.3}  ({} accepted iterations, converged: {})",
        pi.log_likelihood, pi.iterations, pi.converged
    );
    println!("  sector weights:");
    for block in pi.state.blocks() {
        println!("    2j = {:>2}: P_j = {:.4}", block.spin.two_j(), block.weight);
    }

    let aic_3p = aic(three.log_likelihood, 3);
    let aic_pi = aic(pi.log_likelihood, pi_param_count(n));
    println!("\nAIC(3p) = {aic_3p:.2}, AIC(PI) = {aic_pi:.2}");
    println!(
        "deltaAIC = {:+.2} ({} model favored)",
        aic_3p - aic_pi,
        if aic_3p - aic_pi < 0.0 { "3-parameter" } else { "PI" }
    );
    Ok(())
}
