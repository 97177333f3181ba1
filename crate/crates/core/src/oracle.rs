//! Brute-force reference implementation on the full 2^N-dimensional Hilbert
//! space, for N ≤ 6. Everything here is deliberately simple and independent
//! of the block-diagonal machinery it validates: embedding uses an explicit
//! Schur basis built by Gram–Schmidt, and outcome probabilities are summed
//! over all 2^N product projectors.
//!
//! Index convention: basis index `s` encodes qubit p in bit p (least
//! significant bit = qubit 0), with bit value 0 meaning the |0⟩ ("spin up")
//! state, so the number of zero bits z gives the total Jz eigenvalue
//! m = z − N/2.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measurement::Setting;
use crate::pi_state::{multiplicities, PIBlock, PIState};
use crate::spin::{CMatrix, SpinLabel};

/// Dense matrices become unwieldy quickly; 6 qubits (64×64) keeps every
/// oracle check in the sub-second range.
pub const MAX_ORACLE_QUBITS: usize = 6;

/// Full-space density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    n_qubits: usize,
    pub rho: CMatrix,
}

impl DenseState {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn trace(&self) -> f64 {
        (0..self.rho.nrows()).map(|i| self.rho[(i, i)].re).sum()
    }

    pub fn purity(&self) -> f64 {
        let sq = &self.rho * &self.rho;
        (0..sq.nrows()).map(|i| sq[(i, i)].re).sum()
    }
}

fn check_size(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_ORACLE_QUBITS {
        return Err(Error::Unsupported(format!(
            "oracle is limited to {MAX_ORACLE_QUBITS} qubits, got {n_qubits}"
        )));
    }
    Ok(())
}

type CVector = nalgebra::DVector<Complex64>;

/// Explicit orthonormal Schur basis: for every spin sector j and every
/// multiplicity copy, a 2^N × (2j+1) matrix whose column r is |j, m = j−r⟩.
#[derive(Debug, Clone)]
pub struct SchurBasis {
    n_qubits: usize,
    sectors: Vec<SchurSector>,
}

#[derive(Debug, Clone)]
struct SchurSector {
    spin: SpinLabel,
    copies: Vec<CMatrix>,
}

impl SchurBasis {
    /// Builds the basis sector by sector, descending in j. Highest-weight
    /// vectors of sector j are found by Gram–Schmidt of the weight-(m = j)
    /// computational strings against the vectors that higher sectors already
    /// place at that weight; the rest of each copy follows by repeated
    /// application of the collective lowering operator.
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_size(n_qubits)?;
        let dim = 1usize << n_qubits;
        let table = multiplicities(n_qubits);
        let mut sectors: Vec<SchurSector> = Vec::new();
        for &(spin, k_j) in table.entries() {
            // Strings with z zeros, z = (2j + N)/2, span the m = j weight space.
            let zeros = (spin.two_j() as usize + n_qubits) / 2;
            let candidates: Vec<usize> = (0..dim)
                .filter(|s| (n_qubits - s.count_ones() as usize) == zeros)
                .collect();
            let mut occupied: Vec<CVector> = Vec::new();
            for sector in &sectors {
                let row = ((sector.spin.two_j() - spin.two_j()) / 2) as usize;
                for copy in &sector.copies {
                    occupied.push(copy.column(row).into_owned());
                }
            }
            let mut copies = Vec::with_capacity(k_j as usize);
            for &s in &candidates {
                if copies.len() == k_j as usize {
                    break;
                }
                let mut v = CVector::zeros(dim);
                v[s] = Complex64::new(1.0, 0.0);
                // Two projection passes keep the basis orthonormal to
                // working precision.
                for _ in 0..2 {
                    for u in &occupied {
                        let overlap = u.dotc(&v);
                        v -= u * overlap;
                    }
                }
                let norm = v.norm();
                if norm < 1e-8 {
                    continue;
                }
                v /= Complex64::new(norm, 0.0);
                let copy = Self::lower_copy(n_qubits, spin, &v);
                occupied.push(copy.column(0).into_owned());
                copies.push(copy);
            }
            if copies.len() != k_j as usize {
                return Err(Error::Internal(format!(
                    "found {} highest-weight vectors in sector 2j={}, expected {k_j}",
                    copies.len(),
                    spin.two_j()
                )));
            }
            sectors.push(SchurSector { spin, copies });
        }
        Ok(SchurBasis { n_qubits, sectors })
    }

    /// Generates |j, m⟩ for m = j..−j from a highest-weight vector by the
    /// collective lowering operator Σ_p σ−^(p).
    fn lower_copy(n_qubits: usize, spin: SpinLabel, highest: &CVector) -> CMatrix {
        let dim = highest.len();
        let block_dim = spin.dim();
        let mut copy = CMatrix::zeros(dim, block_dim);
        copy.set_column(0, highest);
        for r in 1..block_dim {
            let prev = copy.column(r - 1).into_owned();
            let mut next = CVector::zeros(dim);
            for s in 0..dim {
                let amp = prev[s];
                if amp.norm_sqr() == 0.0 {
                    continue;
                }
                for p in 0..n_qubits {
                    if s & (1 << p) == 0 {
                        next[s | (1 << p)] += amp;
                    }
                }
            }
            let norm = next.norm();
            next /= Complex64::new(norm, 0.0);
            copy.set_column(r, &next);
        }
        copy
    }
}

/// Embeds a block-diagonal PI state into the full 2^N space:
/// Σ_j P_j/K_j Σ_copies B ρ_j B†.
pub fn embed_with(basis: &SchurBasis, state: &PIState) -> Result<DenseState> {
    if basis.n_qubits != state.n_qubits() {
        return Err(Error::invalid(format!(
            "basis is for {} qubits, state for {}",
            basis.n_qubits,
            state.n_qubits()
        )));
    }
    let dim = 1usize << basis.n_qubits;
    let mut rho = CMatrix::zeros(dim, dim);
    for (sector, block) in basis.sectors.iter().zip(state.blocks()) {
        if block.weight == 0.0 {
            continue;
        }
        let scale = block.weight / sector.copies.len() as f64;
        for copy in &sector.copies {
            rho += (copy * &block.rho * copy.adjoint()).scale(scale);
        }
    }
    Ok(DenseState {
        n_qubits: basis.n_qubits,
        rho,
    })
}

/// Convenience wrapper building a fresh Schur basis.
pub fn embed(state: &PIState) -> Result<DenseState> {
    let basis = SchurBasis::new(state.n_qubits())?;
    embed_with(&basis, state)
}

/// Projects a dense PI state back onto block form; inverse of [`embed_with`].
pub fn read_back(basis: &SchurBasis, dense: &DenseState) -> Result<PIState> {
    if basis.n_qubits != dense.n_qubits {
        return Err(Error::invalid("qubit count mismatch"));
    }
    let blocks = basis
        .sectors
        .iter()
        .map(|sector| {
            let d = sector.spin.dim();
            let mut acc = CMatrix::zeros(d, d);
            for copy in &sector.copies {
                acc += copy.adjoint() * &dense.rho * copy;
            }
            let weight: f64 = (0..d).map(|i| acc[(i, i)].re).sum();
            if weight < 1e-12 {
                PIBlock {
                    spin: sector.spin,
                    weight: 0.0,
                    rho: CMatrix::identity(d, d).scale(1.0 / d as f64),
                }
            } else {
                PIBlock {
                    spin: sector.spin,
                    weight,
                    rho: acc.scale(1.0 / weight),
                }
            }
        })
        .collect();
    PIState::from_blocks(dense.n_qubits, blocks)
}

/// Outcome distribution by direct enumeration: builds all 2^N product
/// projectors along ±n and accumulates probabilities by the number k of
/// outcomes along +n.
pub fn brute_distribution(dense: &DenseState, setting: &Setting) -> Result<Vec<f64>> {
    check_size(dense.n_qubits)?;
    let n = dense.n_qubits;
    let dim = 1usize << n;
    let half = setting.theta() / 2.0;
    // Single-qubit eigenvectors of n·σ, amplitudes on (|0⟩, |1⟩).
    let plus = [
        Complex64::new(half.cos(), 0.0),
        Complex64::from_polar(half.sin(), setting.phi()),
    ];
    let minus = [
        Complex64::new(half.sin(), 0.0),
        -Complex64::from_polar(half.cos(), setting.phi()),
    ];
    let mut p = vec![0.0f64; n + 1];
    let mut psi = CVector::zeros(dim);
    for outcomes in 0..dim {
        // Bit p of `outcomes` = 0 means qubit p was found along +n.
        for s in 0..dim {
            let mut amp = Complex64::new(1.0, 0.0);
            for q in 0..n {
                let vec = if outcomes & (1 << q) == 0 { &plus } else { &minus };
                amp *= vec[(s >> q) & 1];
            }
            psi[s] = amp;
        }
        let prob = psi.dotc(&(&dense.rho * &psi)).re;
        let k = n - (outcomes as u32).count_ones() as usize;
        p[k] += prob.max(0.0);
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Internal(format!(
            "brute-force distribution sums to {total}"
        )));
    }
    Ok(p)
}

/// Unitary permutation of qubit positions: bit p of the input index moves to
/// bit `perm[p]` of the output index. Test helper for invariance checks.
pub fn permutation_matrix(n_qubits: usize, perm: &[usize]) -> CMatrix {
    let dim = 1usize << n_qubits;
    let mut m = CMatrix::zeros(dim, dim);
    for s in 0..dim {
        let mut target = 0usize;
        for (p, &dst) in perm.iter().enumerate() {
            if s & (1 << p) != 0 {
                target |= 1 << dst;
            }
        }
        m[(target, s)] = Complex64::new(1.0, 0.0);
    }
    m
}
