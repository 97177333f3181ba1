//! Spin-j linear algebra: angular-momentum operators, basis rotations, and
//! block-index bookkeeping for the total-spin decomposition of N qubits.
//!
//! Conventions used everywhere in the crate:
//! - spins are labelled by the integer `2j` so half-integer values are exact;
//! - within a spin-j block the basis is |j,m⟩ with m = j, j−1, ..., −j, so
//!   row 0 is the extreme "all qubits |0⟩-like" state;
//! - `rotation_to_axis` returns U = exp(−iφJz)·exp(−iθJy), whose columns are
//!   the eigenbasis of the collective spin component along the Bloch
//!   direction n = (sinθcosφ, sinθsinφ, cosθ).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Dense complex matrix used for spin blocks, rotations and effects.
pub type CMatrix = DMatrix<Complex64>;

/// Total-spin label stored as `2j`; block dimension is `2j + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinLabel {
    two_j: u32,
}

impl SpinLabel {
    pub fn from_two_j(two_j: u32) -> Self {
        SpinLabel { two_j }
    }

    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    pub fn j(&self) -> f64 {
        f64::from(self.two_j) / 2.0
    }

    /// Dimension of the spin-j block, `2j + 1`.
    pub fn dim(&self) -> usize {
        self.two_j as usize + 1
    }

    /// Twice the magnetic quantum number of basis row `row` (m = j − row).
    pub fn two_m(&self, row: usize) -> i64 {
        i64::from(self.two_j) - 2 * row as i64
    }

    /// Row index of the |j,m⟩ basis vector, given `2m`.
    /// Returns `None` when |m| > j or the parity does not match.
    pub fn row_of_two_m(&self, two_m: i64) -> Option<usize> {
        let two_j = i64::from(self.two_j);
        if two_m.abs() > two_j || (two_j - two_m) % 2 != 0 {
            return None;
        }
        Some(((two_j - two_m) / 2) as usize)
    }

    /// The spin sectors of an N-qubit system, descending from j = N/2 down to
    /// 0 (N even) or 1/2 (N odd). The first entry is the symmetric "top"
    /// block.
    pub fn for_qubits(n_qubits: usize) -> Vec<SpinLabel> {
        let n = n_qubits as u32;
        (0..=n)
            .rev()
            .filter(|two_j| two_j % 2 == n % 2)
            .map(SpinLabel::from_two_j)
            .collect()
    }
}

/// Angular-momentum matrices (Jx, Jy, Jz) in the |j,m⟩ basis, m = j..−j.
///
/// Jz is diagonal with entries m; the ladder operators have the standard
/// positive matrix elements √(j(j+1) − m(m±1)).
pub fn ladder_operators(spin: SpinLabel) -> (CMatrix, CMatrix, CMatrix) {
    let d = spin.dim();
    let j = spin.j();
    let mut jz = CMatrix::zeros(d, d);
    let mut jp = CMatrix::zeros(d, d); // raising operator J+
    for row in 0..d {
        let m = spin.two_m(row) as f64 / 2.0;
        jz[(row, row)] = Complex64::new(m, 0.0);
        if row > 0 {
            // J+ |j,m⟩ = √(j(j+1) − m(m+1)) |j,m+1⟩ and |j,m+1⟩ sits one row up.
            let amp = (j * (j + 1.0) - m * (m + 1.0)).sqrt();
            jp[(row - 1, row)] = Complex64::new(amp, 0.0);
        }
    }
    let jm = jp.adjoint();
    let jx = (&jp + &jm).scale(0.5);
    let jy = (&jp - &jm) * Complex64::new(0.0, -0.5);
    (jx, jy, jz)
}

/// Eigendecomposition of Jy for one spin; reused across rotation angles.
#[derive(Debug, Clone)]
pub struct JyEigenBasis {
    spin: SpinLabel,
    vectors: CMatrix,
    values: DVector<f64>,
}

impl JyEigenBasis {
    pub fn new(spin: SpinLabel) -> Self {
        let (_, jy, _) = ladder_operators(spin);
        let eig = jy.symmetric_eigen();
        JyEigenBasis {
            spin,
            vectors: eig.eigenvectors,
            values: eig.eigenvalues,
        }
    }

    /// exp(−iθ Jy) via the cached eigenbasis. Exactly the identity at θ = 0.
    pub fn exp_rotation(&self, theta: f64) -> CMatrix {
        let d = self.spin.dim();
        if theta == 0.0 {
            return CMatrix::identity(d, d);
        }
        let mut scaled = self.vectors.clone();
        for (c, lambda) in self.values.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -theta * lambda);
            for r in 0..d {
                scaled[(r, c)] *= phase;
            }
        }
        &scaled * self.vectors.adjoint()
    }
}

/// Unitary change of basis to the eigenbasis of the spin component along a
/// Bloch direction.
#[derive(Debug, Clone)]
pub struct RotationMatrix {
    pub spin: SpinLabel,
    pub theta: f64,
    pub phi: f64,
    matrix: CMatrix,
}

impl RotationMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }
}

/// U = exp(−iφJz)·exp(−iθJy). Column `r` is the |j, m = j−r⟩ eigenvector of
/// n·J for n = (sinθcosφ, sinθsinφ, cosθ).
pub fn rotation_to_axis(spin: SpinLabel, theta: f64, phi: f64) -> RotationMatrix {
    let basis = JyEigenBasis::new(spin);
    rotation_with_basis(&basis, theta, phi)
}

/// Same as [`rotation_to_axis`] but reusing a cached Jy eigenbasis.
pub fn rotation_with_basis(basis: &JyEigenBasis, theta: f64, phi: f64) -> RotationMatrix {
    let spin = basis.spin;
    let d = spin.dim();
    let mut u = basis.exp_rotation(theta);
    if phi != 0.0 {
        // Left-multiply by the diagonal exp(−iφJz).
        for row in 0..d {
            let m = spin.two_m(row) as f64 / 2.0;
            let phase = Complex64::from_polar(1.0, -phi * m);
            for col in 0..d {
                u[(row, col)] *= phase;
            }
        }
    }
    RotationMatrix {
        spin,
        theta,
        phi,
        matrix: u,
    }
}

/// Max |entry| of A − A†; zero for Hermitian matrices.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..m.nrows() {
        for c in r..m.ncols() {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b))
}
