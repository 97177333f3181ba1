//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `cargo test -- --nocapture`).
//!
//! The sweep-based criteria use frozen seeds, so every run is bit-identical;
//! the statistical thresholds were chosen once and are asserted, not tuned.

use std::time::Instant;

use ghz_aic::estimation::{fit_pi, fit_pi_with, fit_three_param, PiFitOptions};
use ghz_aic::measurement::{generate_plan, outcome_distribution, sample_dataset, setting_count};
use ghz_aic::oracle::{brute_distribution, embed_with, SchurBasis};
use ghz_aic::pi_state::{
    mix_true_state, multiplicities, orthogonalize_to_3p, pi_param_count, random_pi_state,
    three_param_state, ThreeParamState,
};
use ghz_aic::selection::{
    crossing_search, delta_aic, linear_fit, sweep, ScalingConfig, SweepConfig, SweepResult,
};

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {criterion}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{criterion}: {detail}");
}

/// L_PI ≥ L_3P − 1e-6 for every dataset fitted during a sweep.
fn assert_nested(result: &SweepResult, context: &str) {
    for record in &result.records {
        assert!(
            record.log_like_pi >= record.log_like_3p - 1e-6,
            "nestedness violated in {context}: rep={} M={} ({} < {})",
            record.rep,
            record.m,
            record.log_like_pi,
            record.log_like_3p
        );
    }
}

#[test]
fn criterion_1_oracle_equivalence() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in 2..=6usize {
        let basis = SchurBasis::new(n).unwrap();
        let plan = generate_plan(n);
        let step = (plan.len() / 10).max(1);
        let settings: Vec<_> = plan.settings().iter().step_by(step).take(10).collect();
        for seed in 0..50u64 {
            let state = random_pi_state(n, 1000 * n as u64 + seed).unwrap();
            let dense = embed_with(&basis, &state).unwrap();
            for setting in &settings {
                let fast = outcome_distribution(&state, setting).unwrap();
                let slow = brute_distribution(&dense, setting).unwrap();
                for (a, b) in fast.iter().zip(&slow) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        "criterion 1 (oracle equivalence)",
        worst < 1e-9 && elapsed.as_secs() < 60,
        &format!("max deviation {worst:.3e} over N=2..6, 50 states x 10 settings, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_2_counting_identities() {
    let d5 = generate_plan(5).len();
    let k5 = pi_param_count(5);
    let mut dims_ok = true;
    for n in 2..=25usize {
        dims_ok &= multiplicities(n).total_dimension() == 1u64 << n;
    }
    report(
        "criterion 2 (counting identities)",
        d5 == 21 && k5 == 55 && dims_ok,
        &format!("D_5={d5}, PI params at N=5: {k5}, sector dimension identity 2..25: {dims_ok}"),
    );
}

#[test]
fn criterion_3_q_zero_prefers_three_param() {
    let config = SweepConfig::new(5, 0.0, vec![210, 1050, 5250, 26250], 100, 31_415);
    let result = sweep(&config).unwrap();
    assert_nested(&result, "criterion 3");
    let all_negative = result.stats.iter().all(|s| s.mean < 0.0);
    let detail: Vec<String> = result
        .stats
        .iter()
        .map(|s| format!("M={}: {:.1}±{:.1}", s.m, s.mean, s.std))
        .collect();
    report(
        "criterion 3 (q=0 always favors 3-parameter model)",
        all_negative,
        &detail.join(", "),
    );
}

#[test]
fn criterion_4_q002_crossing_is_stable() {
    let mut scaling = ScalingConfig::new(100, 27_182);
    scaling.auto.start_factor = 1;
    let (result, censored) = crossing_search(5, 0.02, &scaling, None).unwrap();
    assert_nested(&result, "criterion 4");
    let crossing = result.crossing_m;
    let first = result.crossing_for_reps(|r| r < 50);
    let second = result.crossing_for_reps(|r| r >= 50);
    let (pass, detail) = match (crossing, first, second) {
        (Some(c), Some(a), Some(b)) => {
            let spread = (a - b).abs() / (0.5 * (a + b));
            (
                !censored && c.is_finite() && spread <= 0.30,
                format!("crossing M≈{c:.0}; halves {a:.0} vs {b:.0} differ by {:.1}%", spread * 100.0),
            )
        }
        _ => (
            false,
            format!("missing crossing: full={crossing:?} halves=({first:?}, {second:?})"),
        ),
    };
    report("criterion 4 (q=0.02 crossing, half-ensemble stability)", pass, &detail);
}

#[test]
fn criterion_5_small_m_limit() {
    let d5 = setting_count(5) as u64;
    let config = SweepConfig::new(5, 0.02, vec![d5], 100, 7);
    let result = sweep(&config).unwrap();
    assert_nested(&result, "criterion 5");
    let mean = result.stats[0].mean;
    let limit = -2.0 * (pi_param_count(5) as f64 - 3.0); // −104
    let pass = mean >= limit - 30.0 && mean < 0.0;
    // The 100-rep average also lands within ±25 of the limit itself.
    let tight = (mean - limit).abs() <= 25.0;
    report(
        "criterion 5 (one shot per setting approaches −2(K_PI − 3))",
        pass && tight,
        &format!(
            "mean ΔAIC = {mean:.1}, window [{:.0}, 0), within 25 of {limit:.0}: {tight}",
            limit - 30.0
        ),
    );
}

#[test]
fn criterion_6_crossing_scales_linearly_in_n() {
    let scaling = ScalingConfig::new(50, 20_260_810);
    let n_list = [4usize, 5, 6, 7, 8, 9, 10];
    let points = ghz_aic::selection::scaling_in_n(0.02, &n_list, &scaling, None).unwrap();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut censored = 0;
    for p in &points {
        assert_nested(&p.sweep, "criterion 6");
        match p.crossing_m {
            Some(m) => {
                xs.push(p.x);
                ys.push(m);
            }
            None => censored += 1,
        }
    }
    let inversions = ys.windows(2).filter(|w| w[1] < w[0]).count();
    let (slope, intercept, r2) = linear_fit(&xs, &ys);
    let pass = censored == 0 && inversions <= 1 && r2 >= 0.9 && slope > 0.0;
    let detail = format!(
        "crossings {:?}; inversions={inversions}, fit M≈{intercept:.0}+{slope:.0}·N, R²={r2:.3}",
        ys.iter().map(|m| m.round()).collect::<Vec<_>>()
    );
    report("criterion 6 (crossing grows linearly with N)", pass, &detail);
}

#[test]
fn criterion_7_crossing_scales_subquadratically_in_inverse_q() {
    let q_list = [0.01f64, 0.02, 0.04, 0.08];
    let mut slopes = Vec::new();
    let mut pass = true;
    let mut details = Vec::new();
    for &n in &[5usize, 10] {
        let scaling = ScalingConfig::new(50, 16_180 + n as u64);
        let points = ghz_aic::selection::scaling_in_q(n, &q_list, &scaling, None).unwrap();
        let mut crossings = Vec::new();
        for p in &points {
            assert_nested(&p.sweep, "criterion 7");
            match p.crossing_m {
                Some(m) => crossings.push((p.x, m)),
                None => pass = false,
            }
        }
        // Strictly decreasing in q.
        pass &= crossings.windows(2).all(|w| w[1].1 < w[0].1);
        let log_inv_q: Vec<f64> = crossings.iter().map(|(q, _)| (1.0 / q).ln()).collect();
        let log_m: Vec<f64> = crossings.iter().map(|(_, m)| m.ln()).collect();
        let (slope, _, _) = linear_fit(&log_inv_q, &log_m);
        pass &= slope > 0.0 && slope < 2.0;
        details.push(format!(
            "N={n}: crossings {:?}, log-log slope {slope:.2}",
            crossings.iter().map(|(_, m)| m.round()).collect::<Vec<_>>()
        ));
        slopes.push(slope);
    }
    pass &= slopes[1] < slopes[0];
    details.push(format!(
        "slope N=10 ({:.2}) < slope N=5 ({:.2})",
        slopes[1], slopes[0]
    ));
    report(
        "criterion 7 (sub-quadratic scaling in 1/q, shallower at larger N)",
        pass,
        &details.join("; "),
    );
}

#[test]
fn criterion_8_nestedness_and_monotonicity() {
    let mut checked = 0usize;
    for i in 0..100u64 {
        let n = 3 + (i % 8) as usize; // 3..=10
        let plan = generate_plan(n);
        let truth = if i % 2 == 0 {
            let base = ThreeParamState::new(n, 0.1, 0.4, 0.9).unwrap();
            let pert = orthogonalize_to_3p(&random_pi_state(n, 900 + i).unwrap()).unwrap();
            mix_true_state(&base, &pert, 0.1).unwrap()
        } else {
            random_pi_state(n, 900 + i).unwrap()
        };
        let m = 40 * plan.len() as u64;
        let ds = sample_dataset(&truth, &plan, m, 3000 + i).unwrap();
        let three = fit_three_param(&ds).unwrap();
        if i % 5 == 0 {
            // Full monotonicity audit on a subsample.
            let opts = PiFitOptions {
                record_trace: true,
                ..Default::default()
            };
            let pi = fit_pi_with(&ds, &opts).unwrap();
            let trace = pi.likelihood_trace.as_ref().unwrap();
            assert!(
                trace.windows(2).all(|w| w[1] >= w[0]),
                "non-monotone accepted step at dataset {i}"
            );
            assert!(pi.log_likelihood >= three.log_likelihood - 1e-6);
        } else {
            let pi = fit_pi(&ds).unwrap();
            assert!(
                pi.log_likelihood >= three.log_likelihood - 1e-6,
                "nestedness violated at dataset {i}: {} < {}",
                pi.log_likelihood,
                three.log_likelihood
            );
        }
        checked += 1;
    }
    report(
        "criterion 8 (nestedness and monotone accepted iterations)",
        checked == 100,
        &format!("{checked} random datasets across N=3..10, trace audited on every fifth"),
    );
}

#[test]
fn criterion_9_twenty_five_qubits_under_five_minutes() {
    let start = Instant::now();
    let n = 25;
    let base = ThreeParamState::new(n, 0.0, 0.0, 1.0).unwrap();
    let pert = orthogonalize_to_3p(&random_pi_state(n, 1).unwrap()).unwrap();
    let truth = mix_true_state(&base, &pert, 0.02).unwrap();
    let plan = generate_plan(n);
    let m = 10 * plan.len() as u64;
    let ds = sample_dataset(&truth, &plan, m, 9).unwrap();
    let rep = delta_aic(&ds).unwrap();
    let elapsed = start.elapsed();
    let pass = elapsed.as_secs_f64() < 300.0 && rep.delta_aic.is_finite();
    report(
        "criterion 9 (N=25 ΔAIC within five minutes)",
        pass,
        &format!(
            "M={m}, ΔAIC={:.1}, K_PI={}, wall time {elapsed:.1?}",
            rep.delta_aic, rep.k_pi
        ),
    );
}

#[test]
fn three_param_state_sanity_used_by_suite() {
    // The sweep base state defaults to (0,0,1); make sure that is the GHZ
    // state the criteria reference.
    let a = three_param_state(5, 0.0, 0.0, 1.0).unwrap();
    let b = ghz_aic::pi_state::ghz_state(5).unwrap();
    assert_eq!(a, b);
}
