//! Single-excitation hopping Hamiltonian and its full occupation-space
//! counterpart (oracle scale only).

use log::warn;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{BasisSet, FullBasis, GridSpec};
use crate::scalar::{creal, czero, lit, to_f64, Complex, Real};

/// Physical constants and integration step.
///
/// `omega` is the cavity mode frequency, `zeta` the nearest-neighbour
/// tunnelling energy, `gamma` the boundary escape rate and `dt` the step of
/// one split-step iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams<T> {
    pub hbar: T,
    pub omega: T,
    pub zeta: T,
    pub gamma: T,
    pub dt: T,
}

impl<T: Real> Default for PhysicalParams<T> {
    /// ħ = 1, ω = 1e8, ζ = 1e6, γ = ζ, dt chosen so that ζ·dt/ħ = 0.02.
    fn default() -> Self {
        PhysicalParams { hbar: T::one(), omega: lit(1e8), zeta: lit(1e6), gamma: lit(1e6), dt: lit(2e-8) }
    }
}

impl<T: Real> PhysicalParams<T> {
    /// Rejects non-positive or non-finite values. Logs a warning when the
    /// rotating-wave condition `ζ ≪ ħω` or the small-step condition
    /// `γ·dt ≪ 1` looks violated; returns the warnings as well.
    pub fn validate(&self) -> Result<Vec<String>> {
        for (name, value) in
            [("hbar", self.hbar), ("omega", self.omega), ("zeta", self.zeta), ("gamma", self.gamma), ("dt", self.dt)]
        {
            let v = to_f64(value);
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter { name, value: v });
            }
        }
        let mut warnings = Vec::new();
        let rwa = to_f64(self.zeta / (self.hbar * self.omega));
        if rwa > 0.1 {
            warnings.push(format!("zeta/(hbar*omega) = {rwa:.3} exceeds 0.1; rotating-wave approximation is doubtful"));
        }
        let damping = to_f64(self.gamma * self.dt);
        if damping > 0.1 {
            warnings
                .push(format!("gamma*dt = {damping:.3} exceeds 0.1; the explicit dissipator step is poorly resolved"));
        }
        for w in &warnings {
            warn!("{w}");
        }
        Ok(warnings)
    }

    /// Converts to another scalar type.
    pub fn cast<U: Real>(&self) -> PhysicalParams<U> {
        PhysicalParams {
            hbar: lit(to_f64(self.hbar)),
            omega: lit(to_f64(self.omega)),
            zeta: lit(to_f64(self.zeta)),
            gamma: lit(to_f64(self.gamma)),
            dt: lit(to_f64(self.dt)),
        }
    }
}

/// Dense Hermitian matrix over a basis of dimension `dim()`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator<T: Real> {
    matrix: DMatrix<Complex<T>>,
}

impl<T: Real> HermitianOperator<T> {
    /// Wraps a matrix, checking exact Hermiticity.
    pub fn from_matrix(matrix: DMatrix<Complex<T>>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::BasisMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        let op = HermitianOperator { matrix };
        if !op.is_exactly_hermitian() {
            return Err(Error::Unsupported("operator is not exactly Hermitian".into()));
        }
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex<T>> {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.matrix[(i, j)]
    }

    /// Bitwise `H[i][j] == conj(H[j][i])` for every pair.
    pub fn is_exactly_hermitian(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (i..n).all(|j| self.matrix[(i, j)] == self.matrix[(j, i)].conj()))
    }

    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|z| z.im == T::zero())
    }

    pub fn real_part(&self) -> DMatrix<T> {
        self.matrix.map(|z| z.re)
    }

    pub fn off_diagonal_nonzeros(&self) -> usize {
        let n = self.dim();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && self.matrix[(i, j)] != czero())
            .count()
    }

    /// Top-left `k×k` block.
    pub fn leading_block(&self, k: usize) -> DMatrix<Complex<T>> {
        self.matrix.view((0, 0), (k, k)).into_owned()
    }

    /// Negates the hopping amplitude between ordinals `i` and `j` in both
    /// orientations. Used to seed assembly faults in self-checks.
    pub(crate) fn flip_bond(&mut self, i: usize, j: usize) {
        self.matrix[(i, j)] = -self.matrix[(i, j)];
        self.matrix[(j, i)] = -self.matrix[(j, i)];
    }
}

/// Assembles `Ĥ = Σ ħω a†a + ζ Σ_{⟨i,j⟩} (a_i†a_j + a_i a_j†)` restricted to
/// the single-photon basis. Escaped and vacuum rows stay zero.
pub fn assemble_hamiltonian<T: Real>(basis: &BasisSet, params: &PhysicalParams<T>) -> HermitianOperator<T> {
    let n = basis.dim();
    let grid = basis.grid();
    let mut m = DMatrix::from_element(n, n, czero());
    let energy = creal(params.hbar * params.omega);
    for i in 0..basis.in_plane_dim() {
        m[(i, i)] = energy;
    }
    let hop = creal(params.zeta);
    for (i, j) in grid.edges() {
        m[(i, j)] = hop;
        m[(j, i)] = hop;
    }
    HermitianOperator { matrix: m }
}

/// Hamiltonian on the full occupation space, stored sparsely. Entries are
/// kept sorted by `(row, col)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FullSpaceOperator<T: Real> {
    dim: usize,
    entries: Vec<(u32, u32, Complex<T>)>,
}

impl<T: Real> FullSpaceOperator<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(u32, u32, Complex<T>)] {
        &self.entries
    }

    pub fn get(&self, row: u32, col: u32) -> Complex<T> {
        self.entries
            .binary_search_by(|e| (e.0, e.1).cmp(&(row, col)))
            .map(|k| self.entries[k].2)
            .unwrap_or_else(|_| czero())
    }

    pub fn is_exactly_hermitian(&self) -> bool {
        self.entries.iter().all(|&(r, c, v)| self.get(c, r) == v.conj())
    }

    /// Dense copy, for small spaces.
    pub fn to_dense(&self) -> DMatrix<Complex<T>> {
        let mut m = DMatrix::from_element(self.dim, self.dim, czero());
        for &(r, c, v) in &self.entries {
            m[(r as usize, c as usize)] = v;
        }
        m
    }
}

/// Hopping Hamiltonian on every occupation pattern of the grid. Diagonal is
/// `ħω × (number of photons)`; a hop moves one photon from an occupied site
/// to an empty neighbour with amplitude ζ. Occupations are capped at 1.
pub fn assemble_full_space_hamiltonian<T: Real>(full: &FullBasis, params: &PhysicalParams<T>) -> FullSpaceOperator<T> {
    let grid: GridSpec = full.grid();
    let edges = grid.edges();
    let energy = params.hbar * params.omega;
    let hop = creal(params.zeta);
    let mut entries = Vec::new();
    for pattern in full.patterns() {
        let mut row = Vec::new();
        let photons = pattern.count_ones();
        if photons > 0 {
            row.push((pattern, creal(energy * lit(photons as f64))));
        }
        for &(i, j) in &edges {
            let (bi, bj) = (1u32 << i, 1u32 << j);
            // a_i† a_j and its adjoint: exactly one of the two sites occupied
            if (pattern & bi == 0) != (pattern & bj == 0) {
                row.push((pattern ^ bi ^ bj, hop));
            }
        }
        row.sort_by_key(|e| e.0);
        entries.extend(row.into_iter().map(|(col, v)| (pattern, col, v)));
    }
    FullSpaceOperator { dim: full.dim(), entries }
}

/// Block of `full_op` over the single-excitation patterns, ordered like the
/// in-plane ordinals of the reduced closed Method-A basis.
pub fn restrict_to_single_excitation<T: Real>(
    full_op: &FullSpaceOperator<T>,
    full: &FullBasis,
) -> Result<HermitianOperator<T>> {
    if full_op.dim() != full.dim() {
        return Err(Error::BasisMismatch { expected: full.dim(), found: full_op.dim() });
    }
    let patterns = full.single_excitation();
    let k = patterns.len();
    let m = DMatrix::from_fn(k, k, |i, j| full_op.get(patterns[i], patterns[j]));
    Ok(HermitianOperator { matrix: m })
}
