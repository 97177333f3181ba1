//! How the crossing budget grows with the qubit number at fixed
//! perturbation strength.
//!
//! Run with: cargo run --release --example qubit_scaling

use ghz_aic::selection::{linear_fit, scaling_in_n, ScalingConfig};

fn main() -> ghz_aic::Result<()> {
    let q = 0.05;
    let n_list = [3usize, 4, 5, 6];
    let scaling = ScalingConfig::new(15, 7);

    println!("q = {q}, {} repetitions per point, doubling grid\n", scaling.repetitions);
    let points = scaling_in_n(q, &n_list, &scaling, None)?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for p in &points {
        match p.crossing_m {
            Some(m) => {
                println!("N = {:>2}: crossing at M ≈ {m:.0}", p.x as usize);
                xs.push(p.x);
                ys.push(m);
            }
            None => println!("N = {:>2}: censored (ceiling reached)", p.x as usize),
        }
    }
    if xs.len() >= 2 {
        let (slope, intercept, r2) = linear_fit(&xs, &ys);
        println!("\nlinear fit: crossing ≈ {intercept:.0} + {slope:.0}·N  (R² = {r2:.3})");
    }
    Ok(())
}
