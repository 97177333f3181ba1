//! AIC model comparison and the (N, q, M) sweep harnesses.
//!
//! Sign convention: ΔAIC = AIC(3-parameter) − AIC(PI). Negative values favor
//! the 3-parameter model, positive values the PI model; the crossing point is
//! the measurement budget at which the mean ΔAIC changes sign.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{fit_pi, fit_three_param};
use crate::measurement::{generate_plan, sample_dataset, setting_count, CountsDataset};
use crate::pi_state::{
    mix_true_state, orthogonalize_to_3p, pi_param_count, random_pi_state, PIState,
    ThreeParamState,
};
use crate::seed::{derive_seed, Purpose};

/// AIC = −2·L_max + 2·K, natural-log likelihood.
pub fn aic(log_likelihood: f64, param_count: usize) -> f64 {
    -2.0 * log_likelihood + 2.0 * param_count as f64
}

/// Both models fitted to one dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AicReport {
    #[serde(rename = "aic3p")]
    pub aic_3p: f64,
    #[serde(rename = "aicPI")]
    pub aic_pi: f64,
    /// aic_3p − aic_pi; negative favors the 3-parameter model.
    #[serde(rename = "deltaAic")]
    pub delta_aic: f64,
    #[serde(rename = "k3p")]
    pub k_3p: usize,
    #[serde(rename = "kPI")]
    pub k_pi: usize,
    #[serde(rename = "M")]
    pub total_shots: u64,
    #[serde(rename = "logLike3p")]
    pub log_like_3p: f64,
    #[serde(rename = "logLikePI")]
    pub log_like_pi: f64,
}

/// Runs both fitters and assembles the AIC comparison.
pub fn delta_aic(dataset: &CountsDataset) -> Result<AicReport> {
    let (three, pi) = rayon::join(|| fit_three_param(dataset), || fit_pi(dataset));
    let three = three?;
    let pi = pi?;
    let k_3p = 3usize;
    let k_pi = pi_param_count(dataset.n_qubits());
    let aic_3p = aic(three.log_likelihood, k_3p);
    let aic_pi = aic(pi.log_likelihood, k_pi);
    Ok(AicReport {
        aic_3p,
        aic_pi,
        delta_aic: aic_3p - aic_pi,
        k_3p,
        k_pi,
        total_shots: dataset.total_shots(),
        log_like_3p: three.log_likelihood,
        log_like_pi: pi.log_likelihood,
    })
}

/// Sweep configuration; `base_state` defaults to the ideal GHZ parameters
/// (0, 0, 1) and `fresh_perturbation` draws a new random PI perturbation per
/// repetition (set false to pin one perturbation across repetitions).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    #[serde(rename = "nQubits")]
    pub n_qubits: usize,
    pub q: f64,
    #[serde(rename = "mGrid")]
    pub m_grid: Vec<u64>,
    pub repetitions: usize,
    #[serde(rename = "baseSeed")]
    pub base_seed: u64,
    pub epsilon: f64,
    pub phi: f64,
    pub delta: f64,
    #[serde(rename = "freshPerturbation")]
    pub fresh_perturbation: bool,
}

impl SweepConfig {
    pub fn new(n_qubits: usize, q: f64, m_grid: Vec<u64>, repetitions: usize, base_seed: u64) -> Self {
        SweepConfig {
            n_qubits,
            q,
            m_grid,
            repetitions,
            base_seed,
            epsilon: 0.0,
            phi: 0.0,
            delta: 1.0,
            fresh_perturbation: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::invalid("repetitions must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.q) {
            return Err(Error::invalid(format!("q {} outside [0, 1]", self.q)));
        }
        let d = setting_count(self.n_qubits) as u64;
        if self.m_grid.is_empty() {
            return Err(Error::invalid("measurement grid is empty"));
        }
        if self.m_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("measurement grid must be ascending"));
        }
        if self.m_grid[0] < d {
            return Err(Error::invalid(format!(
                "grid starts below one shot per setting (D_N = {d})"
            )));
        }
        Ok(())
    }
}

/// ΔAIC of one (repetition, M) work item.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaRecord {
    pub m: u64,
    pub rep: usize,
    pub delta_aic: f64,
    /// Sampling seed of this item's dataset, for exact replay.
    pub seed: u64,
    pub log_like_3p: f64,
    pub log_like_pi: f64,
}

/// Mean/stddev of ΔAIC at one grid point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridStat {
    pub m: u64,
    pub mean: f64,
    pub std: f64,
    pub repetitions: usize,
}

/// Full outcome of a sweep: the per-item records plus aggregated statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub records: Vec<DeltaRecord>,
    pub stats: Vec<GridStat>,
    /// Zero crossing of the mean ΔAIC curve, by linear interpolation;
    /// absent when the mean never changes sign on the grid.
    pub crossing_m: Option<f64>,
}

impl SweepResult {
    /// Recomputes the mean curve and its crossing from a subset of
    /// repetitions (e.g. disjoint halves for stability checks).
    pub fn crossing_for_reps(&self, keep: impl Fn(usize) -> bool) -> Option<f64> {
        let ms: Vec<f64> = self.config.m_grid.iter().map(|&m| m as f64).collect();
        let means: Vec<f64> = self
            .config
            .m_grid
            .iter()
            .map(|&m| {
                let vals: Vec<f64> = self
                    .records
                    .iter()
                    .filter(|r| r.m == m && keep(r.rep))
                    .map(|r| r.delta_aic)
                    .collect();
                vals.iter().sum::<f64>() / vals.len() as f64
            })
            .collect();
        crossing_from_curve(&ms, &means)
    }

    /// CSV rows `N,q,M,rep,delta_aic,seed`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,q,M,rep,delta_aic,seed\n");
        for r in &self.records {
            writeln!(
                out,
                "{},{:.16e},{},{},{:.16e},{}",
                self.config.n_qubits, self.config.q, r.m, r.rep, r.delta_aic, r.seed
            )
            .expect("string write");
        }
        out
    }
}

/// Linear interpolation of the zero of a sampled curve: takes the last sign
/// change from negative to positive. Exact on piecewise-linear data.
pub fn crossing_from_curve(ms: &[f64], means: &[f64]) -> Option<f64> {
    debug_assert_eq!(ms.len(), means.len());
    let mut crossing = None;
    for i in 0..means.len().saturating_sub(1) {
        if means[i] < 0.0 && means[i + 1] >= 0.0 {
            let t = -means[i] / (means[i + 1] - means[i]);
            crossing = Some(ms[i] + t * (ms[i + 1] - ms[i]));
        }
    }
    crossing
}

fn sample_std(values: &[f64], mean: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Progress callback: (completed items, total items).
pub type ProgressFn<'a> = dyn Fn(usize, usize) + Sync + 'a;

/// Draws the per-repetition true states. Repetition r uses the perturbation
/// stream seeded by `derive_seed(base, r, 0, Perturbation)`; with
/// `fresh_perturbation = false` every repetition reuses repetition 0's draw.
fn true_states(config: &SweepConfig) -> Result<Vec<PIState>> {
    let base_state = ThreeParamState::new(config.n_qubits, config.epsilon, config.phi, config.delta)?;
    let mut states = Vec::with_capacity(config.repetitions);
    for rep in 0..config.repetitions {
        let stream_rep = if config.fresh_perturbation { rep } else { 0 };
        let seed = derive_seed(config.base_seed, stream_rep as u64, 0, Purpose::Perturbation);
        let perturbation = orthogonalize_to_3p(&random_pi_state(config.n_qubits, seed)?)?;
        states.push(mix_true_state(&base_state, &perturbation, config.q)?);
    }
    Ok(states)
}

/// Runs the full sweep: for every repetition a fresh perturbed true state,
/// for every grid point an independently sampled dataset and its ΔAIC.
/// Work items are independent and run in parallel; records are merged by
/// index so the output is identical for any worker count.
pub fn sweep(config: &SweepConfig) -> Result<SweepResult> {
    sweep_with_progress(config, None)
}

pub fn sweep_with_progress(
    config: &SweepConfig,
    progress: Option<&ProgressFn<'_>>,
) -> Result<SweepResult> {
    config.validate()?;
    let states = true_states(config)?;
    let plan = generate_plan(config.n_qubits);
    let items: Vec<(usize, u64)> = (0..config.repetitions)
        .flat_map(|rep| config.m_grid.iter().map(move |&m| (rep, m)))
        .collect();
    let total = items.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let records: Vec<DeltaRecord> = items
        .par_iter()
        .map(|&(rep, m)| {
            let seed = derive_seed(config.base_seed, rep as u64, m, Purpose::Sampling);
            let dataset = sample_dataset(&states[rep], &plan, m, seed)?;
            let report = delta_aic(&dataset)?;
            if let Some(cb) = progress {
                let n = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                cb(n, total);
            }
            Ok(DeltaRecord {
                m,
                rep,
                delta_aic: report.delta_aic,
                seed,
                log_like_3p: report.log_like_3p,
                log_like_pi: report.log_like_pi,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(assemble(config.clone(), records))
}

fn assemble(config: SweepConfig, records: Vec<DeltaRecord>) -> SweepResult {
    let stats: Vec<GridStat> = config
        .m_grid
        .iter()
        .map(|&m| {
            let vals: Vec<f64> = records
                .iter()
                .filter(|r| r.m == m)
                .map(|r| r.delta_aic)
                .collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            GridStat {
                m,
                mean,
                std: sample_std(&vals, mean),
                repetitions: vals.len(),
            }
        })
        .collect();
    let ms: Vec<f64> = stats.iter().map(|s| s.m as f64).collect();
    let means: Vec<f64> = stats.iter().map(|s| s.mean).collect();
    let crossing_m = crossing_from_curve(&ms, &means);
    SweepResult {
        config,
        records,
        stats,
        crossing_m,
    }
}

/// Grid-widening policy for crossing searches: start at `start_factor`
/// shots per setting and double the budget until the mean ΔAIC turns
/// positive or the ceiling is hit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AutoGrid {
    /// First grid point, in units of D_N (one shot per setting = 1).
    #[serde(rename = "startFactor")]
    pub start_factor: u64,
    /// Hard budget ceiling; points beyond it are censored, not run.
    pub ceiling: u64,
}

impl Default for AutoGrid {
    fn default() -> Self {
        AutoGrid {
            start_factor: 1,
            ceiling: 1 << 22,
        }
    }
}

/// Ensemble and grid policy of a crossing search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub repetitions: usize,
    #[serde(rename = "baseSeed")]
    pub base_seed: u64,
    pub auto: AutoGrid,
    /// Draw a fresh perturbation per repetition (false pins repetition 0's
    /// draw for paper-style single-state curves).
    #[serde(rename = "freshPerturbation")]
    pub fresh_perturbation: bool,
}

impl ScalingConfig {
    pub fn new(repetitions: usize, base_seed: u64) -> Self {
        ScalingConfig {
            repetitions,
            base_seed,
            auto: AutoGrid::default(),
            fresh_perturbation: true,
        }
    }
}

/// One point of a scaling run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingPoint {
    /// The swept coordinate: N for N-scaling, q for q-scaling.
    pub x: f64,
    pub crossing_m: Option<f64>,
    /// True when the grid ceiling was reached without a sign change.
    pub censored: bool,
    pub sweep: SweepResult,
}

/// Runs one crossing search with an auto-widening doubling grid. Because
/// work-item seeds depend on the M value rather than the grid index,
/// extending the grid reuses already-computed records unchanged.
pub fn crossing_search(
    n_qubits: usize,
    q: f64,
    scaling: &ScalingConfig,
    progress: Option<&ProgressFn<'_>>,
) -> Result<(SweepResult, bool)> {
    let (repetitions, base_seed, auto) = (scaling.repetitions, scaling.base_seed, &scaling.auto);
    let d = setting_count(n_qubits) as u64;
    let mut grid: Vec<u64> = vec![d * auto.start_factor.max(1)];
    if grid[0] > auto.ceiling {
        return Err(Error::invalid(format!(
            "grid start {} exceeds ceiling {}",
            grid[0], auto.ceiling
        )));
    }
    let mut config = SweepConfig::new(n_qubits, q, grid.clone(), repetitions, base_seed);
    config.fresh_perturbation = scaling.fresh_perturbation;
    let mut result = sweep_with_progress(&config, progress)?;
    loop {
        let found_crossing = result.crossing_m.is_some();
        if found_crossing {
            return Ok((result, false));
        }
        let next = grid.last().unwrap() * 2;
        if next > auto.ceiling {
            return Ok((result, true));
        }
        // Extend the grid; previous records stay valid because their seeds
        // derive from the M values.
        grid.push(next);
        config.m_grid = grid.clone();
        config.validate()?;
        let states = true_states(&config)?;
        let plan = generate_plan(n_qubits);
        let new_records: Vec<DeltaRecord> = (0..repetitions)
            .into_par_iter()
            .map(|rep| {
                let seed = derive_seed(base_seed, rep as u64, next, Purpose::Sampling);
                let dataset = sample_dataset(&states[rep], &plan, next, seed)?;
                let report = delta_aic(&dataset)?;
                Ok(DeltaRecord {
                    m: next,
                    rep,
                    delta_aic: report.delta_aic,
                    seed,
                    log_like_3p: report.log_like_3p,
                    log_like_pi: report.log_like_pi,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut records = result.records;
        records.extend(new_records);
        result = assemble(config.clone(), records);
        if let Some(cb) = progress {
            cb(result.records.len(), result.records.len());
        }
    }
}

/// Crossing point as a function of the qubit number at fixed q.
pub fn scaling_in_n(
    q: f64,
    n_list: &[usize],
    scaling: &ScalingConfig,
    progress: Option<&ProgressFn<'_>>,
) -> Result<Vec<ScalingPoint>> {
    if q <= 0.0 {
        return Err(Error::invalid("q must be positive for a crossing search"));
    }
    n_list
        .iter()
        .map(|&n| {
            let mut point = scaling.clone();
            point.base_seed = derive_seed(scaling.base_seed, n as u64, 0, Purpose::ScalingPoint);
            let (sweep, censored) = crossing_search(n, q, &point, progress)?;
            Ok(ScalingPoint {
                x: n as f64,
                crossing_m: sweep.crossing_m,
                censored,
                sweep,
            })
        })
        .collect()
}

/// Crossing point as a function of the perturbation strength at fixed N.
pub fn scaling_in_q(
    n_qubits: usize,
    q_list: &[f64],
    scaling: &ScalingConfig,
    progress: Option<&ProgressFn<'_>>,
) -> Result<Vec<ScalingPoint>> {
    if q_list.iter().any(|&q| q <= 0.0) {
        return Err(Error::invalid("all q values must be positive"));
    }
    q_list
        .iter()
        .map(|&q| {
            let mut point = scaling.clone();
            point.base_seed =
                derive_seed(scaling.base_seed, q.to_bits(), 0, Purpose::ScalingPoint);
            let (sweep, censored) = crossing_search(n_qubits, q, &point, progress)?;
            Ok(ScalingPoint {
                x: q,
                crossing_m: sweep.crossing_m,
                censored,
                sweep,
            })
        })
        .collect()
}

/// Least-squares slope and R² of y against x.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    (slope, intercept, r2)
}
