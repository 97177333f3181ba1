//! Log-likelihood evaluation and the two maximum-likelihood fitters.
//!
//! The 3-parameter model is fitted by a coarse grid scan followed by bounded
//! Nelder–Mead refinement; the full PI model by the diluted R·ρ·R fixed-point
//! iteration, which multiplies the state from both sides by
//! T = (1 + κR)/(1+κ) and renormalizes. Steps that would lower the
//! likelihood are retried with halved κ, so accepted iterations are
//! monotone by construction and the iteration preserves positivity exactly
//! (the update is a congruence).
//!
//! Natural logarithms throughout; AIC consumers must use the same base.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{outcome_distribution, CountsDataset, ProjectedPovm};
use crate::nelder_mead;
use crate::pi_state::{pi_uniform_state, PIState, ThreeParamState};
use crate::spin::{CMatrix, SpinLabel};

/// Probabilities below this are floored before taking logs, so a single
/// impossible-looking bin cannot produce NaNs inside the optimizers.
const PROB_FLOOR: f64 = 1e-300;

/// Outcome of a maximum-likelihood fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult<M> {
    pub state: M,
    #[serde(rename = "logLikelihood")]
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Accepted-step likelihood trace; recorded only on request.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub likelihood_trace: Option<Vec<f64>>,
}

/// Σ_settings Σ_k f·ln p(k) with natural logs. Bins with f = 0 contribute
/// nothing regardless of p. A bin with f > 0 whose model probability is
/// exactly zero (possible when a sector has zero weight) makes the data
/// impossible under the model: the function returns −∞ rather than an error.
/// Positive probabilities below 1e-300 are floored to 1e-300.
pub fn log_likelihood(state: &PIState, dataset: &CountsDataset) -> Result<f64> {
    if state.n_qubits() != dataset.n_qubits() {
        return Err(Error::invalid(format!(
            "state has {} qubits but dataset has {}",
            state.n_qubits(),
            dataset.n_qubits()
        )));
    }
    let mut total = 0.0f64;
    for sc in dataset.per_setting() {
        if sc.histogram.iter().all(|&f| f == 0) {
            continue;
        }
        let p = outcome_distribution(state, &sc.setting)?;
        for (k, &f) in sc.histogram.iter().enumerate() {
            if f == 0 {
                continue;
            }
            if p[k] == 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            total += f as f64 * p[k].max(PROB_FLOOR).ln();
        }
    }
    Ok(total)
}

/// Log-likelihood of a 3-parameter model, evaluated through its block
/// embedding.
pub fn log_likelihood_three_param(
    state: &ThreeParamState,
    dataset: &CountsDataset,
) -> Result<f64> {
    log_likelihood(&state.to_pi_state(), dataset)
}

/// Cached per-bin quantities for fast 3-parameter likelihood evaluation.
///
/// Only the top sector carries weight, concentrated on the two extreme Dicke
/// states |e⟩, |g⟩, so per observed bin the probability is
///   p = (1+ε)/2·|⟨u|e⟩|² + (1−ε)/2·|⟨u|g⟩|² + δ√(1−ε²)·Re[e^{iφ}·γ]
/// with γ = U[0,row]*·U[d−1,row].
struct ThreeParamObjective {
    bins: Vec<(f64, f64, f64, Complex64)>, // (f, |a|², |b|², γ)
}

impl ThreeParamObjective {
    fn new(dataset: &CountsDataset) -> Self {
        let n = dataset.n_qubits();
        let top = SpinLabel::from_two_j(n as u32);
        let d = top.dim();
        let povm =
            ProjectedPovm::for_settings(n, dataset.per_setting().iter().map(|s| s.setting));
        let mut bins = Vec::new();
        for (idx, sc) in dataset.per_setting().iter().enumerate() {
            let u = &povm.rotations(idx)[0];
            for (k, &f) in sc.histogram.iter().enumerate() {
                if f == 0 {
                    continue;
                }
                let row = top
                    .row_of_two_m(2 * k as i64 - n as i64)
                    .expect("top sector spans all outcomes");
                let a = u[(0, row)];
                let b = u[(d - 1, row)];
                bins.push((f as f64, a.norm_sqr(), b.norm_sqr(), a.conj() * b));
            }
        }
        ThreeParamObjective { bins }
    }

    fn log_likelihood(&self, epsilon: f64, phi: f64, delta: f64) -> f64 {
        let coherence = delta * (1.0 - epsilon * epsilon).max(0.0).sqrt();
        let (cos_phi, sin_phi) = (phi.cos(), phi.sin());
        let mut total = 0.0;
        for &(f, aa, bb, gamma) in &self.bins {
            let p = 0.5 * (1.0 + epsilon) * aa
                + 0.5 * (1.0 - epsilon) * bb
                + coherence * (gamma.re * cos_phi - gamma.im * sin_phi);
            total += f * p.max(PROB_FLOOR).ln();
        }
        total
    }
}

/// Maximum-likelihood fit of the 3-parameter model: a 5×8×5 grid over the
/// parameter boxes, then Nelder–Mead refinement from the best three grid
/// points (box constraints by coordinate clipping, simplex diameter
/// tolerance 1e-7).
pub fn fit_three_param(dataset: &CountsDataset) -> Result<FitResult<ThreeParamState>> {
    if dataset.per_setting().is_empty() {
        return Err(Error::invalid("cannot fit an empty dataset"));
    }
    let objective = ThreeParamObjective::new(dataset);
    let pi = std::f64::consts::PI;
    // Upper φ clip sits just inside the half-open box [−π, π).
    let bounds = [(-1.0, 1.0), (-pi, pi - 1e-9), (0.0, 1.0)];

    let mut grid: Vec<([f64; 3], f64)> = Vec::with_capacity(200);
    for ie in 0..5 {
        let eps = -1.0 + 0.5 * ie as f64;
        for ip in 0..8 {
            let phi = -pi + 0.25 * pi * ip as f64;
            for id in 0..5 {
                let delta = 0.25 * id as f64;
                let value = objective.log_likelihood(eps, phi, delta);
                grid.push(([eps, phi, delta], value));
            }
        }
    }
    grid.sort_by(|a, b| b.1.total_cmp(&a.1));

    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    let mut iterations = 0;
    for (start, _) in grid.iter().take(3) {
        let result = nelder_mead::minimize(
            |x| -objective.log_likelihood(x[0], x[1], x[2]),
            start,
            &[0.25, 0.25 * pi, 0.125],
            &bounds,
            1e-7,
            2000,
        );
        iterations += result.iterations;
        let value = -result.value;
        let better = match &best {
            Some((_, v, _)) => value > *v,
            None => true,
        };
        if better {
            best = Some((result.x, value, result.converged));
        }
    }
    let (x, log_like, converged) = best.expect("three refinement runs");
    let state = ThreeParamState::new(dataset.n_qubits(), x[0], x[1], x[2])?;
    Ok(FitResult {
        state,
        log_likelihood: log_like,
        iterations,
        converged,
        likelihood_trace: None,
    })
}

/// Knobs of the diluted fixed-point iteration. Defaults: stop when an
/// accepted step gains less than 1e-10 in log-likelihood, cap at 5000
/// iterations.
#[derive(Debug, Clone)]
pub struct PiFitOptions {
    pub gain_tolerance: f64,
    pub max_iterations: usize,
    pub record_trace: bool,
}

impl Default for PiFitOptions {
    fn default() -> Self {
        PiFitOptions {
            gain_tolerance: 1e-10,
            max_iterations: 5000,
            record_trace: false,
        }
    }
}

/// One observed bin flattened for the iteration hot path.
struct BinIndex {
    setting: u32,
    count: f64,
    /// (block index, basis row) of every sector that reaches this outcome.
    parts: Vec<(u32, u32)>,
}

/// Precomputed geometry shared by likelihood evaluation and R-operator
/// assembly: per (setting, sector) rotation matrices plus the flattened
/// nonzero bins.
struct PiFitWorkspace {
    dims: Vec<usize>,
    rotations: Vec<Vec<CMatrix>>, // [setting][block]
    bins: Vec<BinIndex>,
    total_shots: f64,
}

impl PiFitWorkspace {
    fn new(dataset: &CountsDataset) -> Self {
        let n = dataset.n_qubits();
        let spins = SpinLabel::for_qubits(n);
        let povm =
            ProjectedPovm::for_settings(n, dataset.per_setting().iter().map(|s| s.setting));
        let rotations = (0..dataset.per_setting().len())
            .map(|i| povm.rotations(i).to_vec())
            .collect();
        let mut bins = Vec::new();
        for (idx, sc) in dataset.per_setting().iter().enumerate() {
            for (k, &f) in sc.histogram.iter().enumerate() {
                if f == 0 {
                    continue;
                }
                let parts: Vec<(u32, u32)> = spins
                    .iter()
                    .enumerate()
                    .filter_map(|(b, spin)| {
                        spin.row_of_two_m(2 * k as i64 - n as i64)
                            .map(|row| (b as u32, row as u32))
                    })
                    .collect();
                bins.push(BinIndex {
                    setting: idx as u32,
                    count: f as f64,
                    parts,
                });
            }
        }
        PiFitWorkspace {
            dims: spins.iter().map(|s| s.dim()).collect(),
            rotations,
            bins,
            total_shots: dataset.total_shots() as f64,
        }
    }

    /// Column `row` of the rotation for (setting, block), as a slice.
    #[inline]
    fn column<'a>(&'a self, setting: u32, block: u32, row: u32) -> &'a [Complex64] {
        let u = &self.rotations[setting as usize][block as usize];
        let d = self.dims[block as usize];
        &u.as_slice()[row as usize * d..(row as usize + 1) * d]
    }

    /// Per-bin probabilities and the log-likelihood of the weighted sector
    /// operators `sigma`.
    fn evaluate(&self, sigma: &[CMatrix]) -> (Vec<f64>, f64) {
        let mut probs = Vec::with_capacity(self.bins.len());
        let mut log_like = 0.0;
        for bin in &self.bins {
            let mut p = 0.0;
            for &(block, row) in &bin.parts {
                let u = self.column(bin.setting, block, row);
                p += quadratic_form(sigma[block as usize].as_slice(), u);
            }
            p = p.max(0.0);
            probs.push(p);
            log_like += bin.count * p.max(PROB_FLOOR).ln();
        }
        (probs, log_like)
    }

    /// R = (1/S)·Σ_bins (f/p)·E, assembled blockwise from rank-1 updates on
    /// the upper triangle.
    fn r_operator(&self, probs: &[f64]) -> Vec<CMatrix> {
        let mut r: Vec<CMatrix> = self.dims.iter().map(|&d| CMatrix::zeros(d, d)).collect();
        for (bin, &p) in self.bins.iter().zip(probs) {
            let w = bin.count / (p.max(PROB_FLOOR) * self.total_shots);
            for &(block, row) in &bin.parts {
                let u = self.column(bin.setting, block, row);
                rank_one_upper(&mut r[block as usize], u, w);
            }
        }
        for block in &mut r {
            mirror_upper(block);
        }
        r
    }
}

/// u†·σ·u for Hermitian σ, touching only the upper triangle.
#[inline]
fn quadratic_form(sigma: &[Complex64], u: &[Complex64]) -> f64 {
    let d = u.len();
    let mut diag = 0.0f64;
    let mut off = Complex64::new(0.0, 0.0);
    for b in 0..d {
        let col = &sigma[b * d..b * d + d];
        let ub = u[b];
        diag += col[b].re * ub.norm_sqr();
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..b {
            acc += u[a].conj() * col[a];
        }
        off += acc * ub;
    }
    diag + 2.0 * off.re
}

/// R += w·u·u† on the upper triangle (column-major storage).
#[inline]
fn rank_one_upper(r: &mut CMatrix, u: &[Complex64], w: f64) {
    let d = u.len();
    let data = r.as_mut_slice();
    for b in 0..d {
        let scaled = u[b].conj() * w;
        let col = &mut data[b * d..b * d + d];
        for a in 0..=b {
            col[a] += u[a] * scaled;
        }
    }
}

fn mirror_upper(r: &mut CMatrix) {
    let d = r.nrows();
    for b in 0..d {
        for a in 0..b {
            r[(b, a)] = r[(a, b)].conj();
        }
    }
}

/// Maximum-likelihood fit of the full PI model with default options.
pub fn fit_pi(dataset: &CountsDataset) -> Result<FitResult<PIState>> {
    fit_pi_with(dataset, &PiFitOptions::default())
}

/// Diluted R·ρ·R iteration over the block-diagonal PI model.
///
/// State and weights are carried as a single normalized block-diagonal
/// operator σ = ⊕ P_j·ρ_j. Each step forms T = (1 + κR(σ))/(1+κ) and the
/// candidate TσT/Tr[TσT]; candidates that would lower the likelihood are
/// retried with halved κ, and κ resets to 1 after ten consecutive accepted
/// steps. The start is the uniform block-diagonal state, which has full
/// support, and the congruence update keeps every sector positive
/// semidefinite at all times.
pub fn fit_pi_with(dataset: &CountsDataset, opts: &PiFitOptions) -> Result<FitResult<PIState>> {
    if dataset.per_setting().is_empty() {
        return Err(Error::invalid("cannot fit an empty dataset"));
    }
    let n = dataset.n_qubits();
    let ws = PiFitWorkspace::new(dataset);

    let mut sigma = pi_uniform_state(n).weighted_ops();
    let (mut probs, mut log_like) = ws.evaluate(&sigma);
    let mut trace = opts.record_trace.then(|| vec![log_like]);

    let mut kappa = 1.0f64;
    let mut consecutive_accepts = 0usize;
    let mut iterations = 0usize;
    let mut converged = false;

    'outer: while iterations < opts.max_iterations {
        let r = ws.r_operator(&probs);
        for _halving in 0..200 {
            let candidate = apply_dilution(&sigma, &r, kappa);
            let (cand_probs, cand_log_like) = ws.evaluate(&candidate);
            if cand_log_like >= log_like {
                let gain = cand_log_like - log_like;
                sigma = candidate;
                probs = cand_probs;
                log_like = cand_log_like;
                iterations += 1;
                consecutive_accepts += 1;
                if consecutive_accepts >= 10 {
                    kappa = 1.0;
                    consecutive_accepts = 0;
                }
                if let Some(t) = trace.as_mut() {
                    t.push(log_like);
                }
                if gain < opts.gain_tolerance {
                    converged = true;
                    break 'outer;
                }
                continue 'outer;
            }
            kappa *= 0.5;
            consecutive_accepts = 0;
        }
        // κ shrank by 2^-200 without an acceptable step; numerically this is
        // a fixed point.
        converged = true;
        break;
    }

    let state = PIState::from_weighted_ops(n, sigma)?;
    state.validate()?;
    Ok(FitResult {
        state,
        log_likelihood: log_like,
        iterations,
        converged,
        likelihood_trace: trace,
    })
}

/// σ ↦ TσT/Tr[TσT] with T = (1 + κR)/(1+κ), blockwise.
fn apply_dilution(sigma: &[CMatrix], r: &[CMatrix], kappa: f64) -> Vec<CMatrix> {
    let mut out: Vec<CMatrix> = sigma
        .iter()
        .zip(r)
        .map(|(s, rb)| {
            let d = s.nrows();
            let mut t = rb.scale(kappa / (1.0 + kappa));
            for i in 0..d {
                t[(i, i)] += 1.0 / (1.0 + kappa);
            }
            &t * s * &t
        })
        .collect();
    let total: f64 = out
        .iter()
        .map(|m| (0..m.nrows()).map(|i| m[(i, i)].re).sum::<f64>())
        .sum();
    for m in &mut out {
        *m = m.scale(1.0 / total);
    }
    out
}

/// Frobenius norm of the support-projected commutator [R(σ), σ], relative to
/// ‖σ‖_F. Small values certify stationarity of a fitted state; exposed for
/// the test suites.
pub fn stationarity_residual(state: &PIState, dataset: &CountsDataset) -> Result<f64> {
    if state.n_qubits() != dataset.n_qubits() {
        return Err(Error::invalid("qubit count mismatch"));
    }
    let ws = PiFitWorkspace::new(dataset);
    let sigma = state.weighted_ops();
    let (probs, _) = ws.evaluate(&sigma);
    let r = ws.r_operator(&probs);
    let mut commutator_sq = 0.0;
    let mut sigma_sq = 0.0;
    for (s, rb) in sigma.iter().zip(&r) {
        let eig = s.clone().symmetric_eigen();
        let lambda_max = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
        let d = s.nrows();
        let mut projector = CMatrix::zeros(d, d);
        for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda > 1e-7 * lambda_max.max(1e-300) {
                let v = eig.eigenvectors.column(i);
                projector += &v * v.adjoint();
            }
        }
        let commutator = rb * s - s * rb;
        let projected = &projector * commutator * &projector;
        commutator_sq += projected.iter().map(|z| z.norm_sqr()).sum::<f64>();
        sigma_sq += s.iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    Ok((commutator_sq / sigma_sq).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{generate_plan, sample_dataset, Setting, SettingCounts};
    use crate::pi_state::{
        ghz_state, mix_true_state, orthogonalize_to_3p, random_pi_state, three_param_state,
        PIBlock,
    };
    use crate::spin::SpinLabel;
    use approx::assert_abs_diff_eq;

    fn single_qubit_mixed() -> PIState {
        PIState::from_blocks(
            1,
            vec![PIBlock {
                spin: SpinLabel::from_two_j(1),
                weight: 1.0,
                rho: CMatrix::identity(2, 2).scale(0.5),
            }],
        )
        .unwrap()
    }

    fn dataset_one_setting(n: usize, histogram: Vec<u64>) -> CountsDataset {
        CountsDataset::new(
            n,
            vec![SettingCounts {
                setting: Setting::new(0.0, 0.0),
                histogram,
            }],
        )
        .unwrap()
    }

    #[test]
    fn log_likelihood_arithmetic() {
        // p = (1/2, 1/2), counts (3, 1): 4·ln(1/2) = −2.7726.
        let state = single_qubit_mixed();
        let ds = dataset_one_setting(1, vec![3, 1]);
        let ll = log_likelihood(&state, &ds).unwrap();
        assert_abs_diff_eq!(ll, -4.0 * 2f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(ll, -2.7726, epsilon = 1e-4);
    }

    #[test]
    fn log_likelihood_of_empty_dataset_is_zero() {
        let ds = CountsDataset::new(3, vec![]).unwrap();
        let state = ghz_state(3).unwrap();
        assert_eq!(log_likelihood(&state, &ds).unwrap(), 0.0);
    }

    #[test]
    fn impossible_bin_returns_negative_infinity() {
        // GHZ along z has p(k) = 0 for interior k.
        let state = ghz_state(3).unwrap();
        let ds = dataset_one_setting(3, vec![0, 1, 0, 0]);
        assert_eq!(log_likelihood(&state, &ds).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn gibbs_bound_holds() {
        // L(state) ≤ Σ_n Σ_k f·ln(f/S_n): the empirical distribution is the
        // per-setting maximum.
        let plan = generate_plan(4);
        for seed in 0..5u64 {
            let truth = random_pi_state(4, seed).unwrap();
            let ds = sample_dataset(&truth, &plan, 400, seed + 100).unwrap();
            let mut bound = 0.0;
            for sc in ds.per_setting() {
                let shots = sc.shots() as f64;
                for &f in &sc.histogram {
                    if f > 0 {
                        bound += f as f64 * (f as f64 / shots).ln();
                    }
                }
            }
            for probe_seed in 0..3u64 {
                let probe = random_pi_state(4, 500 + probe_seed).unwrap();
                let ll = log_likelihood(&probe, &ds).unwrap();
                assert!(ll <= bound + 1e-9, "ll={ll} exceeds bound={bound}");
            }
        }
    }

    #[test]
    fn three_param_objective_matches_block_path() {
        let plan = generate_plan(4);
        let truth = three_param_state(4, 0.2, 0.9, 0.8).unwrap();
        let ds = sample_dataset(&truth, &plan, 800, 3).unwrap();
        let objective = ThreeParamObjective::new(&ds);
        for &(e, p, d) in &[(0.0, 0.0, 1.0), (0.3, -0.7, 0.5), (-0.5, 2.0, 0.0)] {
            let fast = objective.log_likelihood(e, p, d);
            let slow =
                log_likelihood_three_param(&ThreeParamState::new(4, e, p, d).unwrap(), &ds)
                    .unwrap();
            assert_abs_diff_eq!(fast, slow, epsilon = 1e-9);
        }
    }

    #[test]
    fn three_param_fit_recovers_ghz() {
        let n = 3;
        let plan = generate_plan(n);
        let truth = three_param_state(n, 0.0, 0.0, 1.0).unwrap();
        let m = 100_000 * plan.len() as u64;
        let ds = sample_dataset(&truth, &plan, m, 11).unwrap();
        let fit = fit_three_param(&ds).unwrap();
        assert!(fit.state.epsilon.abs() < 0.02);
        assert!(fit.state.delta > 0.98);
        // At δ≈1 the corner is large, so the phase is identified.
        assert!(fit.state.phi.abs() < 0.02);
    }

    #[test]
    fn three_param_fit_recovers_generic_point() {
        let n = 3;
        let plan = generate_plan(n);
        let truth = three_param_state(n, 0.3, 0.7, 0.9).unwrap();
        let m = 100_000 * plan.len() as u64;
        let ds = sample_dataset(&truth, &plan, m, 12).unwrap();
        let fit = fit_three_param(&ds).unwrap();
        assert_abs_diff_eq!(fit.state.epsilon, 0.3, epsilon = 0.02);
        assert_abs_diff_eq!(fit.state.phi, 0.7, epsilon = 0.02);
        assert_abs_diff_eq!(fit.state.delta, 0.9, epsilon = 0.02);
        assert!(fit.converged);
    }

    #[test]
    fn three_param_fit_beats_every_grid_point() {
        let plan = generate_plan(3);
        let truth = three_param_state(3, -0.4, 1.3, 0.6).unwrap();
        let ds = sample_dataset(&truth, &plan, 500, 4).unwrap();
        let fit = fit_three_param(&ds).unwrap();
        let pi = std::f64::consts::PI;
        for ie in 0..5 {
            for ip in 0..8 {
                for id in 0..5 {
                    let state = ThreeParamState::new(
                        3,
                        -1.0 + 0.5 * ie as f64,
                        -pi + 0.25 * pi * ip as f64,
                        0.25 * id as f64,
                    )
                    .unwrap();
                    let ll = log_likelihood_three_param(&state, &ds).unwrap();
                    assert!(fit.log_likelihood >= ll - 1e-9);
                }
            }
        }
    }

    #[test]
    fn pi_fit_saturates_single_setting_frequencies() {
        // All shots on +z from GHZ: the PI MLE reproduces the empirical
        // frequencies of a saturated multinomial.
        let n = 4;
        let state = ghz_state(n).unwrap();
        let plan_setting = Setting::new(0.0, 0.0);
        let mut histogram = vec![0u64; n + 1];
        histogram[0] = 480;
        histogram[n] = 520;
        let ds = CountsDataset::new(
            n,
            vec![SettingCounts {
                setting: plan_setting,
                histogram,
            }],
        )
        .unwrap();
        let fit = fit_pi(&ds).unwrap();
        let p = outcome_distribution(&fit.state, &plan_setting).unwrap();
        assert_abs_diff_eq!(p[0], 0.48, epsilon = 1e-8);
        assert_abs_diff_eq!(p[n], 0.52, epsilon = 1e-8);
        assert!(fit.converged);
        drop(state);
    }

    #[test]
    fn pi_fit_trace_is_monotone_and_deterministic() {
        let n = 4;
        let plan = generate_plan(n);
        let truth = mix_true_state(
            &ThreeParamState::new(n, 0.0, 0.0, 1.0).unwrap(),
            &orthogonalize_to_3p(&random_pi_state(n, 5).unwrap()).unwrap(),
            0.1,
        )
        .unwrap();
        let ds = sample_dataset(&truth, &plan, 1500, 21).unwrap();
        let opts = PiFitOptions {
            record_trace: true,
            ..Default::default()
        };
        let fit = fit_pi_with(&ds, &opts).unwrap();
        let trace = fit.likelihood_trace.as_ref().unwrap();
        for pair in trace.windows(2) {
            assert!(pair[1] >= pair[0], "likelihood decreased: {pair:?}");
        }
        let again = fit_pi_with(&ds, &opts).unwrap();
        assert_eq!(fit.log_likelihood, again.log_likelihood);
        assert_eq!(fit.iterations, again.iterations);
        assert_eq!(fit.state, again.state);
    }

    #[test]
    fn pi_fit_dominates_three_param_fit() {
        for seed in 0..5u64 {
            let n = 3 + (seed as usize % 3);
            let plan = generate_plan(n);
            let truth = random_pi_state(n, 50 + seed).unwrap();
            let ds = sample_dataset(&truth, &plan, 60 * plan.len() as u64, seed).unwrap();
            let three = fit_three_param(&ds).unwrap();
            let pi = fit_pi(&ds).unwrap();
            assert!(
                pi.log_likelihood >= three.log_likelihood - 1e-6,
                "nestedness violated at seed {seed}: {} < {}",
                pi.log_likelihood,
                three.log_likelihood
            );
        }
    }

    #[test]
    fn pi_fit_reaches_stationarity() {
        let n = 3;
        let plan = generate_plan(n);
        let truth = three_param_state(n, 0.1, 0.4, 0.8).unwrap();
        let ds = sample_dataset(&truth, &plan, 2000, 9).unwrap();
        let fit = fit_pi(&ds).unwrap();
        let residual = stationarity_residual(&fit.state, &ds).unwrap();
        assert!(residual < 1e-5, "residual {residual}");
    }

    #[test]
    fn pi_fit_output_is_valid_state() {
        let plan = generate_plan(5);
        let truth = random_pi_state(5, 77).unwrap();
        let ds = sample_dataset(&truth, &plan, 2100, 7).unwrap();
        let fit = fit_pi(&ds).unwrap();
        fit.state.validate().unwrap();
        assert!(fit.log_likelihood <= 0.0);
    }
}
