//! Collective measurement settings, exact outcome distributions, and
//! synthetic count data.
//!
//! A setting is a Bloch direction n measured simultaneously on every qubit;
//! one shot yields N binary outcomes and is recorded as the count
//! k ∈ {0..N} of outcomes along +n. Recording only k (not the bit strings)
//! is lossless *for permutationally invariant models*: the per-string
//! probability is p(k)/C(N,k) and the combinatorial factors are
//! model-independent, so they cancel in every model comparison. Data from a
//! non-PI source would need the full strings.

use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::pi_state::PIState;
use crate::spin::{rotation_with_basis, CMatrix, JyEigenBasis, SpinLabel};

/// One collective setting: a unit Bloch vector with its spherical angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setting {
    theta: f64,
    phi: f64,
    direction: [f64; 3],
}

impl Setting {
    /// Setting from spherical angles; θ is the polar angle from +z.
    pub fn new(theta: f64, phi: f64) -> Self {
        let direction = [
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        ];
        Setting {
            theta,
            phi,
            direction,
        }
    }

    /// Setting from a Cartesian direction; the vector is normalized.
    pub fn from_direction(v: [f64; 3]) -> Result<Self> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm < 1e-12 {
            return Err(Error::invalid("direction vector is numerically zero"));
        }
        let z = (v[2] / norm).clamp(-1.0, 1.0);
        let theta = z.acos();
        let mut phi = v[1].atan2(v[0]);
        if phi < 0.0 {
            phi += std::f64::consts::TAU;
        }
        Ok(Setting::new(theta, phi))
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn direction(&self) -> [f64; 3] {
        self.direction
    }
}

/// Number of distinct settings needed for full PI-state information,
/// D_N = C(N+2, N).
pub fn setting_count(n_qubits: usize) -> usize {
    (n_qubits + 1) * (n_qubits + 2) / 2
}

/// The D_N collective settings of an N-qubit experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementPlan {
    n_qubits: usize,
    settings: Vec<Setting>,
}

impl MeasurementPlan {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn settings(&self) -> &[Setting] {
        &self.settings
    }

    pub fn len(&self) -> usize {
        self.settings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.settings.is_empty()
    }
}

/// Golden-ratio conjugate 1/φ used by the spherical Fibonacci lattice.
const GOLDEN_CONJUGATE: f64 = 0.618_033_988_749_894_9;

/// Deterministic near-uniform settings: point i of D on the Fibonacci
/// lattice has z = 1 − 2(i+0.5)/D and azimuth 2π·i/φ (mod 2π). No RNG.
pub fn generate_plan(n_qubits: usize) -> MeasurementPlan {
    let d = setting_count(n_qubits);
    let settings = (0..d)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / d as f64;
            let theta = z.acos();
            let phi = (std::f64::consts::TAU * i as f64 * GOLDEN_CONJUGATE)
                .rem_euclid(std::f64::consts::TAU);
            Setting::new(theta, phi)
        })
        .collect();
    MeasurementPlan { n_qubits, settings }
}

/// Exact outcome distribution p(k), k = number of outcomes along +n:
/// p(k) = Σ_j P_j ⟨j,m|U_j† ρ_j U_j|j,m⟩ with m = k − N/2.
///
/// Negative values within −1e-12 (floating-point dust) are clamped to zero;
/// anything more negative is reported as an internal-consistency error.
pub fn outcome_distribution(state: &PIState, setting: &Setting) -> Result<Vec<f64>> {
    let n = state.n_qubits();
    let mut p = vec![0.0f64; n + 1];
    for block in state.blocks() {
        if block.weight == 0.0 {
            continue;
        }
        let basis = JyEigenBasis::new(block.spin);
        let u = rotation_with_basis(&basis, setting.theta, setting.phi).into_matrix();
        accumulate_block_distribution(&mut p, n, block.spin, block.weight, &block.rho, &u)?;
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::Internal(format!(
            "outcome distribution sums to {total}"
        )));
    }
    Ok(p)
}

fn accumulate_block_distribution(
    p: &mut [f64],
    n_qubits: usize,
    spin: SpinLabel,
    weight: f64,
    rho: &CMatrix,
    u: &CMatrix,
) -> Result<()> {
    let rotated = u.adjoint() * rho * u;
    for row in 0..spin.dim() {
        let two_m = spin.two_m(row);
        let k = ((two_m + n_qubits as i64) / 2) as usize;
        let mut val = weight * rotated[(row, row)].re;
        if val < 0.0 {
            if val < -1e-12 {
                return Err(Error::Internal(format!(
                    "outcome probability {val} below clamp tolerance"
                )));
            }
            val = 0.0;
        }
        p[k] += val;
    }
    Ok(())
}

/// Per-setting histograms of observed counts.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingCounts {
    pub setting: Setting,
    /// histogram[k] = number of shots that gave k outcomes along +n.
    pub histogram: Vec<u64>,
}

impl SettingCounts {
    pub fn shots(&self) -> u64 {
        self.histogram.iter().sum()
    }
}

/// A complete synthetic (or loaded) dataset: one histogram per setting.
#[derive(Debug, Clone, PartialEq)]
pub struct CountsDataset {
    n_qubits: usize,
    per_setting: Vec<SettingCounts>,
    total_shots: u64,
}

impl CountsDataset {
    pub fn new(n_qubits: usize, per_setting: Vec<SettingCounts>) -> Result<Self> {
        if per_setting.iter().any(|s| s.histogram.len() != n_qubits + 1) {
            return Err(Error::invalid(format!(
                "histograms must have {} bins",
                n_qubits + 1
            )));
        }
        let total_shots = per_setting.iter().map(SettingCounts::shots).sum();
        Ok(CountsDataset {
            n_qubits,
            per_setting,
            total_shots,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn per_setting(&self) -> &[SettingCounts] {
        &self.per_setting
    }

    pub fn total_shots(&self) -> u64 {
        self.total_shots
    }

    /// CSV serialization: header `setting_index,theta,phi,k,count`, one row
    /// per nonzero histogram bin. Counts are written exactly; angles with 17
    /// significant digits, enough to round-trip every f64 bit pattern.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("setting_index,theta,phi,k,count\n");
        for (idx, sc) in self.per_setting.iter().enumerate() {
            for (k, &count) in sc.histogram.iter().enumerate() {
                if count > 0 {
                    writeln!(
                        out,
                        "{idx},{:.16e},{:.16e},{k},{count}",
                        sc.setting.theta(),
                        sc.setting.phi()
                    )
                    .expect("string write");
                }
            }
        }
        out
    }

    /// Parses the CSV format produced by [`CountsDataset::to_csv`]. The
    /// qubit number is inferred from the number of settings (D_N is strictly
    /// increasing in N); every setting must therefore appear in the file,
    /// which sampling guarantees because each setting receives at least one
    /// shot.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == "setting_index,theta,phi,k,count" => {}
            Some((i, _)) => {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "expected header setting_index,theta,phi,k,count".into(),
                })
            }
            None => {
                return Err(Error::Parse {
                    line: 1,
                    msg: "empty file".into(),
                })
            }
        }
        struct Row {
            setting_index: usize,
            theta: f64,
            phi: f64,
            k: usize,
            count: u64,
        }
        let mut rows: Vec<Row> = Vec::new();
        for (i, line) in lines {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected 5 fields, got {}", fields.len()),
                });
            }
            let parse_err = |what: &str| Error::Parse {
                line: line_no,
                msg: format!("cannot parse {what}"),
            };
            rows.push(Row {
                setting_index: fields[0].parse().map_err(|_| parse_err("setting_index"))?,
                theta: fields[1].parse().map_err(|_| parse_err("theta"))?,
                phi: fields[2].parse().map_err(|_| parse_err("phi"))?,
                k: fields[3].parse().map_err(|_| parse_err("k"))?,
                count: fields[4].parse().map_err(|_| parse_err("count"))?,
            });
        }
        if rows.is_empty() {
            return Err(Error::Parse {
                line: 2,
                msg: "no data rows".into(),
            });
        }
        let n_settings = rows.iter().map(|r| r.setting_index).max().unwrap() + 1;
        let n_qubits = (1..=64)
            .find(|&n| setting_count(n) == n_settings)
            .ok_or_else(|| Error::Parse {
                line: 2,
                msg: format!("{n_settings} settings does not match any D_N"),
            })?;
        let mut per_setting: Vec<Option<SettingCounts>> = vec![None; n_settings];
        for row in &rows {
            if row.k > n_qubits {
                return Err(Error::Parse {
                    line: 2,
                    msg: format!("count bin k={} exceeds N={n_qubits}", row.k),
                });
            }
            let entry = per_setting[row.setting_index].get_or_insert_with(|| SettingCounts {
                setting: Setting::new(row.theta, row.phi),
                histogram: vec![0; n_qubits + 1],
            });
            entry.histogram[row.k] += row.count;
        }
        let per_setting = per_setting
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                s.ok_or_else(|| Error::Parse {
                    line: 2,
                    msg: format!("setting {i} has no rows"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        CountsDataset::new(n_qubits, per_setting)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }
}

/// Samples a dataset of M total shots: each setting receives ⌊M/D⌋ shots and
/// the remainder is distributed round-robin from setting 0. Histograms are
/// exact multinomial draws from the state's outcome distribution; the result
/// is fully determined by `rng_seed`.
pub fn sample_dataset(
    state: &PIState,
    plan: &MeasurementPlan,
    total_shots: u64,
    rng_seed: u64,
) -> Result<CountsDataset> {
    if state.n_qubits() != plan.n_qubits() {
        return Err(Error::invalid(format!(
            "state has {} qubits but plan has {}",
            state.n_qubits(),
            plan.n_qubits()
        )));
    }
    let d = plan.len() as u64;
    if total_shots < d {
        return Err(Error::invalid(format!(
            "need at least one shot per setting: M={total_shots} < D={d}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let base = total_shots / d;
    let remainder = total_shots % d;
    let per_setting = plan
        .settings()
        .iter()
        .enumerate()
        .map(|(i, setting)| {
            let shots = base + u64::from((i as u64) < remainder);
            let p = outcome_distribution(state, setting)?;
            let histogram = sample_multinomial(&mut rng, shots, &p);
            Ok(SettingCounts {
                setting: *setting,
                histogram,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    CountsDataset::new(state.n_qubits(), per_setting)
}

/// Exact multinomial sampling by sequential binomial draws; O(bins) per
/// setting independent of the shot count.
fn sample_multinomial(rng: &mut ChaCha8Rng, shots: u64, p: &[f64]) -> Vec<u64> {
    let mut histogram = vec![0u64; p.len()];
    let mut remaining = shots;
    let mut mass_left = 1.0f64;
    for (k, &pk) in p.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k == p.len() - 1 {
            histogram[k] = remaining;
            break;
        }
        let cond = if mass_left > 0.0 {
            (pk / mass_left).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let draw = Binomial::new(remaining, cond)
            .expect("conditional probability in [0,1]")
            .sample(rng);
        histogram[k] = draw;
        remaining -= draw;
        mass_left -= pk;
    }
    histogram
}

/// Rotated-basis projectors for every (setting, sector) pair: the effect for
/// outcome k on sector j is E = U_j |j,m⟩⟨j,m| U_j† with m = k − N/2. Also
/// the cached rotation matrices that the PI fitter iterates with.
#[derive(Debug, Clone)]
pub struct ProjectedPovm {
    n_qubits: usize,
    spins: Vec<SpinLabel>,
    /// rotations[setting][block] = U_j for that setting.
    rotations: Vec<Vec<CMatrix>>,
}

impl ProjectedPovm {
    pub fn new(plan: &MeasurementPlan) -> Self {
        Self::for_settings(plan.n_qubits(), plan.settings().iter().copied())
    }

    /// Builds the projectors for an arbitrary list of settings (used when a
    /// dataset carries its own settings).
    pub fn for_settings(n_qubits: usize, settings: impl Iterator<Item = Setting>) -> Self {
        let spins = SpinLabel::for_qubits(n_qubits);
        let bases: Vec<JyEigenBasis> = spins.iter().map(|&s| JyEigenBasis::new(s)).collect();
        let rotations = settings
            .map(|setting| {
                bases
                    .iter()
                    .map(|b| rotation_with_basis(b, setting.theta(), setting.phi()).into_matrix())
                    .collect()
            })
            .collect();
        ProjectedPovm {
            n_qubits,
            spins,
            rotations,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_settings(&self) -> usize {
        self.rotations.len()
    }

    pub fn spins(&self) -> &[SpinLabel] {
        &self.spins
    }

    /// Rotation matrices of one setting, in block order.
    pub fn rotations(&self, setting_idx: usize) -> &[CMatrix] {
        &self.rotations[setting_idx]
    }

    /// Basis row of outcome k within sector `spin`, if the sector
    /// contributes to that outcome.
    pub fn row_for(&self, spin: SpinLabel, k: usize) -> Option<usize> {
        let two_m = 2 * k as i64 - self.n_qubits as i64;
        spin.row_of_two_m(two_m)
    }

    /// Materializes the block effect operator E for (setting, outcome k,
    /// sector); `None` when the sector does not reach that outcome.
    pub fn effect(&self, setting_idx: usize, k: usize, block_idx: usize) -> Option<CMatrix> {
        let spin = self.spins[block_idx];
        let row = self.row_for(spin, k)?;
        let u = &self.rotations[setting_idx][block_idx];
        let col = u.column(row);
        Some(&col * col.adjoint())
    }
}
