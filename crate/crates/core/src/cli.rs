//! Experiment harness behind the `ghz-aic` binary: configuration handling,
//! output layout, and one entry point per subcommand.
//!
//! Every command writes into a fresh directory `<out>/run-<unix-secs>-<hash>`
//! (hash of the resolved configuration), containing the data files plus a
//! JSON sidecar with the full configuration echo, seeds and crate version —
//! enough to reproduce every byte. Data file contents never contain wall
//!-clock state, so reruns of the same configuration are byte-identical.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::{fit_pi, fit_three_param};
use crate::measurement::{generate_plan, sample_dataset, CountsDataset};
use crate::oracle::{brute_distribution, embed_with, SchurBasis, MAX_ORACLE_QUBITS};
use crate::pi_state::{
    mix_true_state, orthogonalize_to_3p, pi_param_count, random_pi_state, ThreeParamState,
};
use crate::seed::{derive_seed, Purpose};
use crate::selection::{
    scaling_in_n, scaling_in_q, sweep_with_progress, ScalingConfig, ScalingPoint, SweepConfig,
    SweepResult,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const MAX_QUBITS: usize = 30;

/// Flat `key = value` configuration file; `#` starts a comment. Every key
/// must be consumed by the command, unknown keys are rejected.
#[derive(Debug, Default)]
pub struct KeyValueConfig {
    values: HashMap<String, String>,
}

impl KeyValueConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut values = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: "expected key = value".into(),
            })?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(KeyValueConfig { values })
    }

    pub fn take(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    /// Errors on any key the command did not consume.
    pub fn finish(self) -> Result<()> {
        if let Some(key) = self.values.keys().next() {
            return Err(Error::invalid(format!("unknown config key `{key}`")));
        }
        Ok(())
    }
}

/// Command-line value wins over the config file, which wins over the
/// default.
fn resolve<T: FromStr>(
    cli: Option<T>,
    file: &mut KeyValueConfig,
    key: &str,
    default: T,
) -> Result<T> {
    if let Some(v) = cli {
        file.take(key);
        return Ok(v);
    }
    match file.take(key) {
        Some(text) => text
            .parse::<T>()
            .map_err(|_| Error::invalid(format!("config key `{key}`: cannot parse `{text}`"))),
        None => Ok(default),
    }
}

/// Loads the optional `--config` file; absent means an empty config.
pub fn resolve_config_file(path: Option<&Path>) -> Result<KeyValueConfig> {
    match path {
        Some(p) => KeyValueConfig::load(p),
        None => Ok(KeyValueConfig::default()),
    }
}

fn validate_qubits(n: usize) -> Result<usize> {
    if !(2..=MAX_QUBITS).contains(&n) {
        return Err(Error::invalid(format!(
            "qubits must be in [2, {MAX_QUBITS}], got {n}"
        )));
    }
    Ok(n)
}

fn validate_q(q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid(format!("q must be in [0, 1], got {q}")));
    }
    Ok(q)
}

fn fnv1a64(data: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in data {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Creates `<root>/run-<unix-secs>-<confighash>`, suffixing on collision.
fn make_run_dir(root: &Path, config_echo: &str) -> Result<PathBuf> {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let hash = fnv1a64(config_echo.as_bytes()) as u32;
    let base = root.join(format!("run-{secs}-{hash:08x}"));
    let mut dir = base.clone();
    let mut suffix = 1u32;
    loop {
        match std::fs::create_dir_all(dir.parent().unwrap_or(root))
            .and_then(|_| std::fs::create_dir(&dir))
        {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                suffix += 1;
                dir = PathBuf::from(format!("{}-{suffix}", base.display()));
            }
            Err(e) => return Err(Error::io(dir, e)),
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    write_file(path, &(text + "\n"))
}

/// Runs `f` on a dedicated rayon pool of `workers` threads; 0 keeps the
/// global default pool.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    if workers == 0 {
        f()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool")
            .install(f)
    }
}

fn progress_printer(label: &str) -> impl Fn(usize, usize) + Sync + '_ {
    let counter = AtomicUsize::new(0);
    move |done, total| {
        counter.store(done, Ordering::Relaxed);
        eprintln!("{label}: {done}/{total} work items done");
    }
}

// ---------------------------------------------------------------------------
// simulate

#[derive(Debug, Clone, Serialize)]
pub struct SimulateConfig {
    pub command: String,
    pub version: String,
    pub qubits: usize,
    pub q: f64,
    pub epsilon: f64,
    pub phi: f64,
    pub delta: f64,
    pub shots: u64,
    pub seed: u64,
    #[serde(rename = "perturbationSeed")]
    pub perturbation_seed: u64,
    #[serde(rename = "samplingSeed")]
    pub sampling_seed: u64,
}

/// Samples one dataset from ρ_true = (1−q)·ρ_3P + q·ρ_perturbation and
/// writes `counts.csv` + `metadata.json` into a fresh run directory.
pub fn cmd_simulate(
    qubits: usize,
    q: f64,
    epsilon: f64,
    phi: f64,
    delta: f64,
    shots: u64,
    seed: u64,
    out_root: &Path,
) -> Result<PathBuf> {
    validate_qubits(qubits)?;
    validate_q(q)?;
    let base = ThreeParamState::new(qubits, epsilon, phi, delta)?;
    let perturbation_seed = derive_seed(seed, 0, 0, Purpose::Perturbation);
    let sampling_seed = derive_seed(seed, 0, shots, Purpose::Sampling);
    let truth = if q > 0.0 {
        let pert = orthogonalize_to_3p(&random_pi_state(qubits, perturbation_seed)?)?;
        mix_true_state(&base, &pert, q)?
    } else {
        base.to_pi_state()
    };
    let plan = generate_plan(qubits);
    let dataset = sample_dataset(&truth, &plan, shots, sampling_seed)?;

    let config = SimulateConfig {
        command: "simulate".into(),
        version: VERSION.into(),
        qubits,
        q,
        epsilon,
        phi,
        delta,
        shots,
        seed,
        perturbation_seed,
        sampling_seed,
    };
    let echo = serde_json::to_string(&config)?;
    let dir = make_run_dir(out_root, &echo)?;
    dataset.write_csv(&dir.join("counts.csv"))?;
    write_json(&dir.join("metadata.json"), &config)?;
    Ok(dir)
}

// ---------------------------------------------------------------------------
// fit

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    ThreeParam,
    Pi,
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "3p" => Ok(ModelKind::ThreeParam),
            "pi" => Ok(ModelKind::Pi),
            other => Err(Error::invalid(format!(
                "model must be `3p` or `pi`, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct FitSidecar<T: Serialize> {
    command: String,
    version: String,
    model: String,
    dataset: String,
    #[serde(rename = "paramCount")]
    param_count: usize,
    fit: T,
}

/// Fits one model to a CSV dataset, writes the result JSON (next to the
/// dataset unless `out` is given) and prints the log-likelihood and
/// parameter count to standard output.
pub fn cmd_fit(dataset_path: &Path, model: ModelKind, out: Option<&Path>) -> Result<PathBuf> {
    let dataset = CountsDataset::read_csv(dataset_path)?;
    let (name, text, log_like, params) = match model {
        ModelKind::ThreeParam => {
            let fit = fit_three_param(&dataset)?;
            let sidecar = FitSidecar {
                command: "fit".into(),
                version: VERSION.into(),
                model: "3p".into(),
                dataset: dataset_path.display().to_string(),
                param_count: 3,
                fit: fit.clone(),
            };
            (
                "3p",
                serde_json::to_string_pretty(&sidecar)?,
                fit.log_likelihood,
                3,
            )
        }
        ModelKind::Pi => {
            let fit = fit_pi(&dataset)?;
            let params = pi_param_count(dataset.n_qubits());
            let sidecar = FitSidecar {
                command: "fit".into(),
                version: VERSION.into(),
                model: "pi".into(),
                dataset: dataset_path.display().to_string(),
                param_count: params,
                fit: fit.clone(),
            };
            (
                "pi",
                serde_json::to_string_pretty(&sidecar)?,
                fit.log_likelihood,
                params,
            )
        }
    };
    let out_path = match out {
        Some(p) => p.to_path_buf(),
        None => dataset_path.with_extension(format!("{name}.fit.json")),
    };
    write_file(&out_path, &(text + "\n"))?;
    println!("logLikelihood {log_like:.12}");
    println!("parameters {params}");
    Ok(out_path)
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Debug, Clone, Serialize)]
pub struct SweepCommandConfig {
    pub command: String,
    pub version: String,
    #[serde(flatten)]
    pub sweep: SweepConfig,
    pub workers: usize,
}

#[derive(Debug, Clone, Serialize)]
struct SweepSummary<'a> {
    #[serde(flatten)]
    config: &'a SweepCommandConfig,
    #[serde(rename = "deltaAicConvention")]
    convention: &'static str,
    stats: &'a [crate::selection::GridStat],
    #[serde(rename = "crossingM")]
    crossing_m: Option<f64>,
    censored: bool,
}

const CONVENTION: &str = "deltaAic = AIC(3p) - AIC(PI); negative favors the 3-parameter model";

fn write_sweep_outputs(
    dir: &Path,
    csv_name: &str,
    json_name: &str,
    config: &SweepCommandConfig,
    result: &SweepResult,
    censored: bool,
) -> Result<()> {
    write_file(&dir.join(csv_name), &result.to_csv())?;
    write_json(
        &dir.join(json_name),
        &SweepSummary {
            config,
            convention: CONVENTION,
            stats: &result.stats,
            crossing_m: result.crossing_m,
            censored,
        },
    )
}

/// Runs a ΔAIC sweep over an explicit measurement grid and writes
/// `sweep.csv` + `summary.json`.
pub fn cmd_sweep(config: SweepConfig, workers: usize, out_root: &Path) -> Result<PathBuf> {
    validate_qubits(config.n_qubits)?;
    validate_q(config.q)?;
    let command = SweepCommandConfig {
        command: "sweep".into(),
        version: VERSION.into(),
        sweep: config.clone(),
        workers,
    };
    let echo = serde_json::to_string(&command)?;
    let dir = make_run_dir(out_root, &echo)?;
    let progress = progress_printer("sweep");
    let result = with_workers(workers, || sweep_with_progress(&config, Some(&progress)))?;
    write_sweep_outputs(&dir, "sweep.csv", "summary.json", &command, &result, false)?;
    Ok(dir)
}

// ---------------------------------------------------------------------------
// scaling commands

#[derive(Debug, Clone, Serialize)]
pub struct ScalingCommandConfig {
    pub command: String,
    pub version: String,
    #[serde(rename = "nQubits", skip_serializing_if = "Option::is_none")]
    pub n_qubits: Option<usize>,
    #[serde(rename = "nList", skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(rename = "qList", skip_serializing_if = "Option::is_none")]
    pub q_list: Option<Vec<f64>>,
    #[serde(flatten)]
    pub scaling: ScalingConfig,
    pub workers: usize,
}

#[derive(Debug, Clone, Serialize)]
struct ScalingPointSummary {
    x: f64,
    #[serde(rename = "crossingM")]
    crossing_m: Option<f64>,
    censored: bool,
    stats: Vec<crate::selection::GridStat>,
}

#[derive(Debug, Clone, Serialize)]
struct ScalingSummary<'a> {
    #[serde(flatten)]
    config: &'a ScalingCommandConfig,
    #[serde(rename = "deltaAicConvention")]
    convention: &'static str,
    points: Vec<ScalingPointSummary>,
}

fn write_scaling_outputs(
    dir: &Path,
    config: &ScalingCommandConfig,
    label: &str,
    points: &[ScalingPoint],
) -> Result<()> {
    for point in points {
        let name = format!("point_{label}{}.csv", point.x);
        write_file(&dir.join(name), &point.sweep.to_csv())?;
    }
    write_json(
        &dir.join("summary.json"),
        &ScalingSummary {
            config,
            convention: CONVENTION,
            points: points
                .iter()
                .map(|p| ScalingPointSummary {
                    x: p.x,
                    crossing_m: p.crossing_m,
                    censored: p.censored,
                    stats: p.sweep.stats.clone(),
                })
                .collect(),
        },
    )
}

/// Crossing-point scaling in the qubit number at fixed q.
pub fn cmd_scaling_n(
    q: f64,
    n_list: Vec<usize>,
    scaling: ScalingConfig,
    workers: usize,
    out_root: &Path,
) -> Result<PathBuf> {
    if n_list.is_empty() {
        return Err(Error::invalid("n-list is empty"));
    }
    for &n in &n_list {
        validate_qubits(n)?;
    }
    validate_q(q)?;
    if scaling.repetitions == 0 {
        return Err(Error::invalid("reps must be at least 1"));
    }
    let config = ScalingCommandConfig {
        command: "scaling-n".into(),
        version: VERSION.into(),
        n_qubits: None,
        n_list: Some(n_list.clone()),
        q: Some(q),
        q_list: None,
        scaling: scaling.clone(),
        workers,
    };
    let echo = serde_json::to_string(&config)?;
    let dir = make_run_dir(out_root, &echo)?;
    let progress = progress_printer("scaling-n");
    let points = with_workers(workers, || {
        scaling_in_n(q, &n_list, &scaling, Some(&progress))
    })?;
    write_scaling_outputs(&dir, &config, "N", &points)?;
    Ok(dir)
}

/// Crossing-point scaling in the perturbation strength at fixed N.
pub fn cmd_scaling_q(
    n_qubits: usize,
    q_list: Vec<f64>,
    scaling: ScalingConfig,
    workers: usize,
    out_root: &Path,
) -> Result<PathBuf> {
    if q_list.is_empty() {
        return Err(Error::invalid("q-list is empty"));
    }
    validate_qubits(n_qubits)?;
    for &q in &q_list {
        validate_q(q)?;
    }
    if scaling.repetitions == 0 {
        return Err(Error::invalid("reps must be at least 1"));
    }
    let config = ScalingCommandConfig {
        command: "scaling-q".into(),
        version: VERSION.into(),
        n_qubits: Some(n_qubits),
        n_list: None,
        q: None,
        q_list: Some(q_list.clone()),
        scaling: scaling.clone(),
        workers,
    };
    let echo = serde_json::to_string(&config)?;
    let dir = make_run_dir(out_root, &echo)?;
    let progress = progress_printer("scaling-q");
    let points = with_workers(workers, || {
        scaling_in_q(n_qubits, &q_list, &scaling, Some(&progress))
    })?;
    write_scaling_outputs(&dir, &config, "q", &points)?;
    Ok(dir)
}

// ---------------------------------------------------------------------------
// oracle-check

#[derive(Debug, Clone, Serialize)]
pub struct OracleCheckReport {
    #[serde(rename = "nQubits")]
    pub n_qubits: usize,
    pub samples: usize,
    pub seed: u64,
    #[serde(rename = "maxDeviation")]
    pub max_deviation: f64,
    pub passed: bool,
}

/// Compares the block-diagonal probability engine against the full-space
/// brute-force oracle on `samples` random states × 10 settings. Setting the
/// environment variable `GHZ_AIC_ORACLE_FAULT` injects a deviation, which
/// exercises the failure path end to end.
pub fn cmd_oracle_check(n_qubits: usize, samples: usize, seed: u64) -> Result<OracleCheckReport> {
    if n_qubits < 2 || n_qubits > MAX_ORACLE_QUBITS {
        return Err(Error::invalid(format!(
            "oracle-check supports 2..={MAX_ORACLE_QUBITS} qubits, got {n_qubits}"
        )));
    }
    if samples == 0 {
        return Err(Error::invalid("samples must be at least 1"));
    }
    let basis = SchurBasis::new(n_qubits)?;
    let plan = generate_plan(n_qubits);
    let step = (plan.len() / 10).max(1);
    let settings: Vec<_> = plan.settings().iter().step_by(step).take(10).collect();
    let mut max_deviation = 0.0f64;
    for i in 0..samples {
        let state = random_pi_state(n_qubits, derive_seed(seed, i as u64, 0, Purpose::Sampling))?;
        let dense = embed_with(&basis, &state)?;
        for setting in &settings {
            let fast = crate::measurement::outcome_distribution(&state, setting)?;
            let slow = brute_distribution(&dense, setting)?;
            for (a, b) in fast.iter().zip(&slow) {
                max_deviation = max_deviation.max((a - b).abs());
            }
        }
    }
    if std::env::var_os("GHZ_AIC_ORACLE_FAULT").is_some() {
        max_deviation += 1.0;
    }
    Ok(OracleCheckReport {
        n_qubits,
        samples,
        seed,
        max_deviation,
        passed: max_deviation < 1e-9,
    })
}

// ---------------------------------------------------------------------------
// shared argument plumbing used by the binary

/// Comma-separated list parser for grid/N/q list flags.
pub fn parse_list<T: FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<T>()
                .map_err(|_| Error::invalid(format!("cannot parse {what} element `{part}`")))
        })
        .collect()
}

/// Resolved sweep-style arguments shared by `sweep`, `scaling-n` and
/// `scaling-q`.
pub struct CommonArgs {
    pub reps: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub workers: usize,
    pub start_factor: u64,
    pub ceiling: u64,
    pub fixed_perturbation: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn resolve_common(
    file: &mut KeyValueConfig,
    reps: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    workers: Option<usize>,
    start_factor: Option<u64>,
    ceiling: Option<u64>,
    fixed_perturbation: bool,
) -> Result<CommonArgs> {
    let out = match out {
        Some(p) => {
            file.take("out");
            p
        }
        None => PathBuf::from(file.take("out").unwrap_or_else(|| "runs".into())),
    };
    let fixed = if fixed_perturbation {
        file.take("fixed-perturbation");
        true
    } else {
        match file.take("fixed-perturbation") {
            Some(text) => text.parse::<bool>().map_err(|_| {
                Error::invalid(format!("config key `fixed-perturbation`: `{text}`"))
            })?,
            None => false,
        }
    };
    Ok(CommonArgs {
        reps: resolve(reps, file, "reps", 100)?,
        seed: resolve(seed, file, "seed", 0)?,
        out,
        workers: resolve(workers, file, "workers", 0)?,
        start_factor: resolve(start_factor, file, "start-factor", 1)?,
        ceiling: resolve(ceiling, file, "ceiling", 1 << 22)?,
        fixed_perturbation: fixed,
    })
}
