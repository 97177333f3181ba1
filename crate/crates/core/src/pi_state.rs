//! Block-diagonal permutationally invariant (PI) density operators.
//!
//! A PI state of N qubits is stored as one block per total-spin sector
//! j ∈ {N/2, N/2−1, ...}: a sector weight P_j plus a unit-trace (2j+1)×(2j+1)
//! density block ρ_j. The multiplicity degrees of freedom carry no
//! information for PI states and are kept implicit (maximally mixed).
//!
//! Constructors provided here cover everything the experiments need: the GHZ
//! target, the 3-parameter noisy-GHZ family, random PI states, the component
//! orthogonal to the 3-parameter family, and convex mixtures of the two.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::{hermiticity_defect, min_eigenvalue, CMatrix, SpinLabel};

const WEIGHT_FLOOR: f64 = 1e-12;

/// One total-spin sector of a PI state.
#[derive(Debug, Clone, PartialEq)]
pub struct PIBlock {
    pub spin: SpinLabel,
    /// Sector probability P_j.
    pub weight: f64,
    /// Unit-trace density block ρ_j. Zero-weight sectors carry a maximally
    /// mixed placeholder so downstream code never divides by a zero trace.
    pub rho: CMatrix,
}

/// Block-diagonal PI density operator; blocks are ordered by descending spin,
/// so `blocks()[0]` is the symmetric top sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PIStateJson", into = "PIStateJson")]
pub struct PIState {
    n_qubits: usize,
    blocks: Vec<PIBlock>,
}

impl PIState {
    /// Builds a state from explicit blocks and validates all invariants.
    pub fn from_blocks(n_qubits: usize, blocks: Vec<PIBlock>) -> Result<Self> {
        let state = PIState { n_qubits, blocks };
        state.validate()?;
        Ok(state)
    }

    /// Builds a state from weighted sector operators P_j·ρ_j (in descending
    /// spin order), normalizing the total trace to one. Sectors whose weight
    /// falls below 1e-12 are frozen to maximally mixed placeholders with
    /// weight zero.
    pub(crate) fn from_weighted_ops(n_qubits: usize, ops: Vec<CMatrix>) -> Result<Self> {
        let spins = SpinLabel::for_qubits(n_qubits);
        if ops.len() != spins.len() {
            return Err(Error::invalid(format!(
                "expected {} sector operators for {} qubits, got {}",
                spins.len(),
                n_qubits,
                ops.len()
            )));
        }
        let total: f64 = ops.iter().map(trace_re).sum();
        if total <= 0.0 {
            return Err(Error::Internal(
                "total trace of weighted sector operators is not positive".into(),
            ));
        }
        let blocks = spins
            .into_iter()
            .zip(ops)
            .map(|(spin, op)| {
                let weight = trace_re(&op) / total;
                if weight < WEIGHT_FLOOR {
                    PIBlock {
                        spin,
                        weight: 0.0,
                        rho: mixed_block(spin.dim()),
                    }
                } else {
                    PIBlock {
                        spin,
                        weight,
                        rho: op.scale(1.0 / (weight * total)),
                    }
                }
            })
            .collect();
        Ok(PIState { n_qubits, blocks })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn blocks(&self) -> &[PIBlock] {
        &self.blocks
    }

    /// The symmetric j = N/2 sector.
    pub fn top_block(&self) -> &PIBlock {
        &self.blocks[0]
    }

    /// Weighted sector operators P_j·ρ_j in block order.
    pub fn weighted_ops(&self) -> Vec<CMatrix> {
        self.blocks.iter().map(|b| b.rho.scale(b.weight)).collect()
    }

    /// Checks all structural invariants: sector enumeration, weight simplex,
    /// Hermiticity, positivity and unit trace of every block.
    pub fn validate(&self) -> Result<()> {
        let spins = SpinLabel::for_qubits(self.n_qubits);
        if self.blocks.len() != spins.len()
            || self
                .blocks
                .iter()
                .zip(&spins)
                .any(|(b, s)| b.spin != *s || b.rho.nrows() != s.dim() || b.rho.ncols() != s.dim())
        {
            return Err(Error::invalid(
                "blocks must enumerate spins N/2, N/2-1, ... with dimensions 2j+1".to_string(),
            ));
        }
        let mut weight_sum = 0.0;
        for block in &self.blocks {
            if !(block.weight >= 0.0) {
                return Err(Error::invalid(format!(
                    "negative sector weight {} at 2j={}",
                    block.weight,
                    block.spin.two_j()
                )));
            }
            weight_sum += block.weight;
            if hermiticity_defect(&block.rho) > 1e-12 {
                return Err(Error::invalid(format!(
                    "sector 2j={} is not Hermitian",
                    block.spin.two_j()
                )));
            }
            if (trace_re(&block.rho) - 1.0).abs() > 1e-10 {
                return Err(Error::invalid(format!(
                    "sector 2j={} does not have unit trace",
                    block.spin.two_j()
                )));
            }
            if min_eigenvalue(&block.rho) < -1e-10 {
                return Err(Error::invalid(format!(
                    "sector 2j={} is not positive semidefinite",
                    block.spin.two_j()
                )));
            }
        }
        if (weight_sum - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!(
                "sector weights sum to {weight_sum}, expected 1"
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// JSON schema: {nQubits, blocks: [{twoJ, weight, rho_real, rho_imag}]}.
#[derive(Serialize, Deserialize, Clone)]
struct PIStateJson {
    #[serde(rename = "nQubits")]
    n_qubits: usize,
    blocks: Vec<PIBlockJson>,
}

#[derive(Serialize, Deserialize, Clone)]
struct PIBlockJson {
    #[serde(rename = "twoJ")]
    two_j: u32,
    weight: f64,
    rho_real: Vec<Vec<f64>>,
    rho_imag: Vec<Vec<f64>>,
}

impl From<PIState> for PIStateJson {
    fn from(state: PIState) -> Self {
        let blocks = state
            .blocks
            .iter()
            .map(|b| {
                let d = b.spin.dim();
                let rho_real = (0..d)
                    .map(|r| (0..d).map(|c| b.rho[(r, c)].re).collect())
                    .collect();
                let rho_imag = (0..d)
                    .map(|r| (0..d).map(|c| b.rho[(r, c)].im).collect())
                    .collect();
                PIBlockJson {
                    two_j: b.spin.two_j(),
                    weight: b.weight,
                    rho_real,
                    rho_imag,
                }
            })
            .collect();
        PIStateJson {
            n_qubits: state.n_qubits,
            blocks,
        }
    }
}

impl TryFrom<PIStateJson> for PIState {
    type Error = Error;

    fn try_from(raw: PIStateJson) -> Result<Self> {
        let blocks = raw
            .blocks
            .iter()
            .map(|b| {
                let d = b.two_j as usize + 1;
                if b.rho_real.len() != d
                    || b.rho_imag.len() != d
                    || b.rho_real.iter().any(|row| row.len() != d)
                    || b.rho_imag.iter().any(|row| row.len() != d)
                {
                    return Err(Error::invalid(format!(
                        "sector 2j={} has malformed matrix data",
                        b.two_j
                    )));
                }
                let rho = CMatrix::from_fn(d, d, |r, c| {
                    Complex64::new(b.rho_real[r][c], b.rho_imag[r][c])
                });
                Ok(PIBlock {
                    spin: SpinLabel::from_two_j(b.two_j),
                    weight: b.weight,
                    rho,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PIState::from_blocks(raw.n_qubits, blocks)
    }
}

fn trace_re(m: &CMatrix) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum()
}

/// Maximally mixed placeholder block I/d.
fn mixed_block(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim).scale(1.0 / dim as f64)
}

fn zero_weight_blocks(n_qubits: usize) -> Vec<PIBlock> {
    SpinLabel::for_qubits(n_qubits)
        .into_iter()
        .map(|spin| PIBlock {
            spin,
            weight: 0.0,
            rho: mixed_block(spin.dim()),
        })
        .collect()
}

/// Exact binomial coefficient; arguments stay far below overflow for N ≤ 30.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc as u64
}

/// Multiplicities K_j of the spin-j sectors of N qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiplicityTable {
    n_qubits: usize,
    entries: Vec<(SpinLabel, u64)>,
}

impl MultiplicityTable {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// `(spin, K_j)` pairs in descending spin order.
    pub fn entries(&self) -> &[(SpinLabel, u64)] {
        &self.entries
    }

    pub fn get(&self, spin: SpinLabel) -> Option<u64> {
        self.entries
            .iter()
            .find(|(s, _)| *s == spin)
            .map(|(_, k)| *k)
    }

    /// Σ_j (2j+1)·K_j; equals 2^N.
    pub fn total_dimension(&self) -> u64 {
        self.entries.iter().map(|(s, k)| s.dim() as u64 * k).sum()
    }
}

/// K_j = C(N, N/2−j) − C(N, N/2−j−1) for every sector of N qubits.
pub fn multiplicities(n_qubits: usize) -> MultiplicityTable {
    let n = n_qubits as u64;
    let entries = SpinLabel::for_qubits(n_qubits)
        .into_iter()
        .map(|spin| {
            let drop = (n - u64::from(spin.two_j())) / 2; // N/2 − j
            let k = binomial(n, drop) - if drop == 0 { 0 } else { binomial(n, drop - 1) };
            (spin, k)
        })
        .collect();
    MultiplicityTable { n_qubits, entries }
}

/// Number of free real parameters of a normalized PI state,
/// Σ_j (2j+1)² − 1.
pub fn pi_param_count(n_qubits: usize) -> usize {
    SpinLabel::for_qubits(n_qubits)
        .iter()
        .map(|s| s.dim() * s.dim())
        .sum::<usize>()
        - 1
}

/// The N-qubit GHZ state (|0…0⟩ + |1…1⟩)/√2 in block form: all weight in the
/// symmetric sector, with ½ at the four extreme-m corners.
pub fn ghz_state(n_qubits: usize) -> Result<PIState> {
    three_param_state(n_qubits, 0.0, 0.0, 1.0)
}

/// The 3-parameter noisy-GHZ model: population imbalance ε, systematic phase
/// φ, and coherence δ between |0…0⟩ and |1…1⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeParamState {
    #[serde(rename = "nQubits")]
    pub n_qubits: usize,
    pub epsilon: f64,
    pub phi: f64,
    pub delta: f64,
}

impl ThreeParamState {
    /// Validates the parameter boxes ε ∈ [−1,1], φ ∈ [−π,π), δ ∈ [0,1].
    pub fn new(n_qubits: usize, epsilon: f64, phi: f64, delta: f64) -> Result<Self> {
        if n_qubits < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 qubits, got {n_qubits}"
            )));
        }
        if !(-1.0..=1.0).contains(&epsilon) {
            return Err(Error::invalid(format!("epsilon {epsilon} outside [-1, 1]")));
        }
        if !(-std::f64::consts::PI..std::f64::consts::PI).contains(&phi) {
            return Err(Error::invalid(format!("phi {phi} outside [-pi, pi)")));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::invalid(format!("delta {delta} outside [0, 1]")));
        }
        Ok(ThreeParamState {
            n_qubits,
            epsilon,
            phi,
            delta,
        })
    }

    /// Embeds the model into block form: everything lives in the symmetric
    /// sector, concentrated on the two extreme Dicke states.
    pub fn to_pi_state(&self) -> PIState {
        let mut blocks = zero_weight_blocks(self.n_qubits);
        let d = blocks[0].spin.dim();
        let mut top = CMatrix::zeros(d, d);
        let corner = 0.5
            * self.delta
            * (1.0 - self.epsilon * self.epsilon).sqrt()
            * Complex64::from_polar(1.0, self.phi);
        top[(0, 0)] = Complex64::new(0.5 * (1.0 + self.epsilon), 0.0);
        top[(d - 1, d - 1)] = Complex64::new(0.5 * (1.0 - self.epsilon), 0.0);
        top[(0, d - 1)] = corner;
        top[(d - 1, 0)] = corner.conj();
        blocks[0].weight = 1.0;
        blocks[0].rho = top;
        PIState {
            n_qubits: self.n_qubits,
            blocks,
        }
    }
}

/// Convenience wrapper: validated 3-parameter state in block form.
pub fn three_param_state(n_qubits: usize, epsilon: f64, phi: f64, delta: f64) -> Result<PIState> {
    Ok(ThreeParamState::new(n_qubits, epsilon, phi, delta)?.to_pi_state())
}

/// A random PI state: sector weights from a flat Dirichlet, sector blocks
/// Hilbert–Schmidt distributed (normalized G·G† with complex Gaussian G).
/// Deterministic for a given seed.
pub fn random_pi_state(n_qubits: usize, rng_seed: u64) -> Result<PIState> {
    if n_qubits < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 qubits, got {n_qubits}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let spins = SpinLabel::for_qubits(n_qubits);
    // Flat Dirichlet over sectors = normalized iid Exp(1) draws.
    let raw: Vec<f64> = spins.iter().map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    let blocks = spins
        .into_iter()
        .zip(raw)
        .map(|(spin, w)| {
            let d = spin.dim();
            let g = CMatrix::from_fn(d, d, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            let rho = &g * g.adjoint();
            let tr = trace_re(&rho);
            PIBlock {
                spin,
                weight: w / total,
                rho: rho.scale(1.0 / tr),
            }
        })
        .collect();
    PIState::from_blocks(n_qubits, blocks)
}

/// PI state with sector weights proportional to the block dimensions and
/// identity blocks: the maximally mixed state over the ⊕_j spin-j basis.
/// Used as the positivity-repair reference and as the PI fit start.
pub fn pi_uniform_state(n_qubits: usize) -> PIState {
    let spins = SpinLabel::for_qubits(n_qubits);
    let total: f64 = spins.iter().map(|s| s.dim() as f64).sum();
    let blocks = spins
        .into_iter()
        .map(|spin| PIBlock {
            spin,
            weight: spin.dim() as f64 / total,
            rho: mixed_block(spin.dim()),
        })
        .collect();
    PIState { n_qubits, blocks }
}

/// Block form of the full-space maximally mixed state 1/2^N: sector weights
/// (2j+1)·K_j / 2^N with identity blocks.
pub fn maximally_mixed_state(n_qubits: usize) -> PIState {
    let table = multiplicities(n_qubits);
    let total = 2f64.powi(n_qubits as i32);
    let blocks = table
        .entries()
        .iter()
        .map(|&(spin, k)| PIBlock {
            spin,
            weight: spin.dim() as f64 * k as f64 / total,
            rho: mixed_block(spin.dim()),
        })
        .collect();
    PIState { n_qubits, blocks }
}

/// Reference state for positivity repair: like [`pi_uniform_state`] but with
/// the two extreme Dicke states of the top sector removed, so mixing with it
/// never reintroduces support on the 3-parameter family.
fn corner_free_uniform(n_qubits: usize) -> Vec<CMatrix> {
    let spins = SpinLabel::for_qubits(n_qubits);
    let total: f64 = spins
        .iter()
        .enumerate()
        .map(|(i, s)| if i == 0 { s.dim() - 2 } else { s.dim() } as f64)
        .sum();
    spins
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let d = s.dim();
            let mut m = CMatrix::identity(d, d);
            if i == 0 {
                m[(0, 0)] = Complex64::new(0.0, 0.0);
                m[(d - 1, d - 1)] = Complex64::new(0.0, 0.0);
            }
            m.scale(1.0 / total)
        })
        .collect()
}

/// Removes the component of a PI state living on the two extreme Dicke
/// states of the symmetric sector — the operator span of the 3-parameter
/// family — and repairs positivity.
///
/// Zeroing only the four corner matrix elements cannot yield a positive
/// operator while couplings between the extreme and interior states remain,
/// so the projection clears the full extreme rows and columns of the top
/// block. The result is renormalized and, if any numerical negativity
/// remains, mixed with a corner-free reference state at the smallest
/// coefficient t ∈ [0,1] (bisection to 1e-6) restoring positivity. Inputs
/// entirely supported on the extreme states (e.g. the GHZ state itself) map
/// to the corner-free reference state.
pub fn orthogonalize_to_3p(state: &PIState) -> Result<PIState> {
    let n = state.n_qubits;
    let mut ops = state.weighted_ops();
    let d = ops[0].nrows();
    for idx in 0..d {
        ops[0][(0, idx)] = Complex64::new(0.0, 0.0);
        ops[0][(idx, 0)] = Complex64::new(0.0, 0.0);
        ops[0][(d - 1, idx)] = Complex64::new(0.0, 0.0);
        ops[0][(idx, d - 1)] = Complex64::new(0.0, 0.0);
    }
    let reference = corner_free_uniform(n);
    let total: f64 = ops.iter().map(trace_re).sum();
    if total < 1e-12 {
        return finish_orthogonal(n, reference);
    }
    for op in &mut ops {
        *op = op.scale(1.0 / total);
    }
    let psd_at = |t: f64| -> bool {
        ops.iter().zip(&reference).all(|(a, b)| {
            let mixed = a.scale(1.0 - t) + b.scale(t);
            min_eigenvalue(&mixed) >= -1e-12
        })
    };
    let t = if psd_at(0.0) {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while hi - lo > 1e-6 {
            let mid = 0.5 * (lo + hi);
            if psd_at(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    let mixed = ops
        .iter()
        .zip(&reference)
        .map(|(a, b)| a.scale(1.0 - t) + b.scale(t))
        .collect();
    finish_orthogonal(n, mixed)
}

/// Assembles the orthogonalized state, using a corner-free placeholder for
/// an empty top sector so the output keeps its zero corners.
fn finish_orthogonal(n_qubits: usize, ops: Vec<CMatrix>) -> Result<PIState> {
    let mut state = PIState::from_weighted_ops(n_qubits, ops)?;
    if state.blocks[0].weight == 0.0 {
        let d = state.blocks[0].spin.dim();
        let mut rho = CMatrix::identity(d, d).scale(1.0 / (d as f64 - 2.0));
        rho[(0, 0)] = Complex64::new(0.0, 0.0);
        rho[(d - 1, d - 1)] = Complex64::new(0.0, 0.0);
        state.blocks[0].rho = rho;
    }
    state.validate()?;
    Ok(state)
}

/// ρ_true = (1−q)·ρ_3P + q·ρ_PI, computed blockwise on weighted sector
/// operators.
pub fn mix_true_state(rho_3p: &ThreeParamState, rho_pi: &PIState, q: f64) -> Result<PIState> {
    if rho_3p.n_qubits != rho_pi.n_qubits() {
        return Err(Error::invalid(format!(
            "qubit count mismatch: {} vs {}",
            rho_3p.n_qubits,
            rho_pi.n_qubits()
        )));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid(format!("q {q} outside [0, 1]")));
    }
    let a = rho_3p.to_pi_state();
    let ops = a
        .weighted_ops()
        .into_iter()
        .zip(rho_pi.weighted_ops())
        .map(|(x, y)| x.scale(1.0 - q) + y.scale(q))
        .collect();
    let state = PIState::from_weighted_ops(rho_pi.n_qubits(), ops)?;
    state.validate()?;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn binomial_basics() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(30, 15), 155_117_520);
        assert_eq!(binomial(4, 7), 0);
    }

    #[test]
    fn multiplicities_for_five_qubits() {
        // Direct evaluation of the binomial-difference formula.
        let table = multiplicities(5);
        assert_eq!(table.get(SpinLabel::from_two_j(5)), Some(1));
        assert_eq!(table.get(SpinLabel::from_two_j(3)), Some(4));
        assert_eq!(table.get(SpinLabel::from_two_j(1)), Some(5));
    }

    #[test]
    fn symmetric_sector_is_multiplicity_free() {
        for n in 2..=12 {
            let table = multiplicities(n);
            assert_eq!(table.entries()[0].1, 1, "K_top != 1 at N={n}");
        }
    }

    #[test]
    fn dimension_counting_identity() {
        let table = multiplicities(4);
        assert_eq!(table.total_dimension(), 16);
        for n in 1..=25 {
            assert_eq!(multiplicities(n).total_dimension(), 1u64 << n);
        }
    }

    #[test]
    fn parameter_counts() {
        assert_eq!(pi_param_count(5), 55);
        assert_eq!(pi_param_count(1), 3);
        // Independent direct summation over twoJ ∈ {0, 2, ..., 10}.
        let direct: usize = (0..=10u32)
            .step_by(2)
            .map(|two_j| ((two_j + 1) * (two_j + 1)) as usize)
            .sum::<usize>()
            - 1;
        assert_eq!(pi_param_count(10), direct);
        assert_eq!(direct, 285);
    }

    #[test]
    fn ghz_top_block_corners() {
        let state = ghz_state(3).unwrap();
        let top = state.top_block();
        assert_eq!(top.spin.dim(), 4);
        assert_abs_diff_eq!(top.rho[(0, 0)].re, 0.5);
        assert_abs_diff_eq!(top.rho[(0, 3)].re, 0.5);
        assert_abs_diff_eq!(top.rho[(3, 0)].re, 0.5);
        assert_abs_diff_eq!(top.rho[(3, 3)].re, 0.5);
        assert_abs_diff_eq!(top.rho[(1, 1)].norm(), 0.0);
        assert_eq!(top.weight, 1.0);
    }

    #[test]
    fn ghz_rejects_single_qubit() {
        assert!(ghz_state(1).is_err());
    }

    #[test]
    fn three_param_reduces_to_ghz() {
        let a = ghz_state(4).unwrap();
        let b = three_param_state(4, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn three_param_incoherent_mixture() {
        let state = three_param_state(6, 0.0, 0.0, 0.0).unwrap();
        let top = &state.top_block().rho;
        assert_abs_diff_eq!(top[(0, 0)].re, 0.5);
        assert_abs_diff_eq!(top[(6, 6)].re, 0.5);
        assert_abs_diff_eq!(top[(0, 6)].norm(), 0.0);
    }

    #[test]
    fn three_param_corner_positivity() {
        // Closed-form 2x2 eigenvalues of the corner submatrix.
        let (eps, delta) = (0.3f64, 0.9f64);
        let expected_min = 0.5 * (1.0 - (eps * eps + delta * delta * (1.0 - eps * eps)).sqrt());
        assert!(expected_min >= 0.0);
        let state = three_param_state(5, eps, 0.7, delta).unwrap();
        let top = &state.top_block().rho;
        let d = top.nrows();
        let corner = CMatrix::from_fn(2, 2, |r, c| {
            top[(if r == 0 { 0 } else { d - 1 }, if c == 0 { 0 } else { d - 1 })]
        });
        assert_abs_diff_eq!(min_eigenvalue(&corner), expected_min, epsilon = 1e-12);
        state.validate().unwrap();
    }

    #[test]
    fn three_param_rejects_out_of_box() {
        assert!(three_param_state(4, 1.5, 0.0, 0.5).is_err());
        assert!(three_param_state(4, 0.0, 4.0, 0.5).is_err());
        assert!(three_param_state(4, 0.0, 0.0, -0.1).is_err());
    }

    #[test]
    fn random_state_invariants_and_determinism() {
        for seed in 0..20 {
            let state = random_pi_state(6, seed).unwrap();
            state.validate().unwrap();
        }
        let a = random_pi_state(5, 42).unwrap();
        let b = random_pi_state(5, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_pi_state(5, 43).unwrap());
    }

    #[test]
    fn random_weights_have_flat_dirichlet_mean() {
        // Dirichlet(1,1,1) over the three sectors of N=4: mean weight 1/3.
        let mut sums = [0.0f64; 3];
        let samples = 1000;
        for seed in 0..samples {
            let state = random_pi_state(4, seed).unwrap();
            for (i, b) in state.blocks().iter().enumerate() {
                sums[i] += b.weight;
            }
        }
        for s in sums {
            assert_abs_diff_eq!(s / samples as f64, 1.0 / 3.0, epsilon = 0.03);
        }
    }

    #[test]
    fn orthogonalize_clears_ghz_corners() {
        let out = orthogonalize_to_3p(&ghz_state(5).unwrap()).unwrap();
        out.validate().unwrap();
        let top = out.top_block();
        let d = top.spin.dim();
        let w = top.weight;
        for &(r, c) in &[(0, 0), (0, d - 1), (d - 1, 0), (d - 1, d - 1)] {
            assert_eq!((top.rho[(r, c)] * w).norm(), 0.0);
        }
    }

    #[test]
    fn orthogonal_to_every_three_param_state() {
        // The Hilbert–Schmidt inner product reduces to the four corner
        // entries, which must vanish exactly.
        let state = orthogonalize_to_3p(&random_pi_state(5, 7).unwrap()).unwrap();
        let top = state.top_block();
        let d = top.spin.dim();
        let weighted = top.rho.scale(top.weight);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let eps = rng.gen_range(-1.0..1.0);
            let phi = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            let delta = rng.gen_range(0.0..1.0);
            let other = three_param_state(5, eps, phi, delta).unwrap();
            let b = &other.top_block().rho;
            let mut inner = Complex64::new(0.0, 0.0);
            for &(r, c) in &[(0, 0), (0, d - 1), (d - 1, 0), (d - 1, d - 1)] {
                inner += weighted[(r, c)].conj() * b[(r, c)];
            }
            assert_eq!(inner.norm(), 0.0);
        }
    }

    #[test]
    fn orthogonalize_repairs_positivity() {
        for seed in 0..10 {
            let out = orthogonalize_to_3p(&random_pi_state(6, seed).unwrap()).unwrap();
            for b in out.blocks() {
                assert!(min_eigenvalue(&b.rho) >= -1e-10);
            }
        }
    }

    #[test]
    fn orthogonalize_is_idempotent() {
        let once = orthogonalize_to_3p(&random_pi_state(5, 3).unwrap()).unwrap();
        let twice = orthogonalize_to_3p(&once).unwrap();
        for (a, b) in once.blocks().iter().zip(twice.blocks()) {
            assert_abs_diff_eq!(a.weight, b.weight, epsilon = 1e-10);
            let diff = &a.rho - &b.rho;
            assert!(diff.iter().map(|z| z.norm()).fold(0.0f64, f64::max) < 1e-10);
        }
    }

    #[test]
    fn mixing_endpoints() {
        let base = ThreeParamState::new(4, 0.1, 0.2, 0.8).unwrap();
        let pert = orthogonalize_to_3p(&random_pi_state(4, 11).unwrap()).unwrap();
        let at_zero = mix_true_state(&base, &pert, 0.0).unwrap();
        assert_eq!(at_zero, base.to_pi_state());
        let at_one = mix_true_state(&base, &pert, 1.0).unwrap();
        for (a, b) in at_one.blocks().iter().zip(pert.blocks()) {
            assert_abs_diff_eq!(a.weight, b.weight, epsilon = 1e-12);
            if a.weight > 0.0 {
                let diff = &a.rho - &b.rho;
                assert!(diff.iter().map(|z| z.norm()).fold(0.0f64, f64::max) < 1e-12);
            }
        }
    }

    #[test]
    fn mixing_scales_corners_linearly() {
        let base = ThreeParamState::new(5, 0.0, 0.0, 1.0).unwrap();
        let pert = orthogonalize_to_3p(&random_pi_state(5, 5).unwrap()).unwrap();
        let mixed = mix_true_state(&base, &pert, 0.02).unwrap();
        let top = mixed.top_block();
        let d = top.spin.dim();
        let corner = top.rho[(0, d - 1)] * top.weight;
        assert_abs_diff_eq!(corner.re, 0.98 * 0.5, epsilon = 1e-12);
    }

    #[test]
    fn mixing_rejects_mismatched_sizes() {
        let base = ThreeParamState::new(4, 0.0, 0.0, 1.0).unwrap();
        let pert = random_pi_state(5, 1).unwrap();
        assert!(mix_true_state(&base, &pert, 0.5).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let state = random_pi_state(5, 21).unwrap();
        let text = state.to_json().unwrap();
        let back = PIState::from_json(&text).unwrap();
        // serde_json emits shortest round-tripping decimals, so the round
        // trip is bit-exact, well inside the 1e-15 relative budget.
        assert_eq!(state, back);
    }

    #[test]
    fn reference_states_are_valid() {
        for n in 2..=8 {
            pi_uniform_state(n).validate().unwrap();
            maximally_mixed_state(n).validate().unwrap();
        }
    }
}
