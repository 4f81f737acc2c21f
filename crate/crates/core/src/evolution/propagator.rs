//! One-step unitary propagators.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::hamiltonian::{HermitianOperator, PhysicalParams};
use crate::lattice::GridSpec;
use crate::scalar::{cis, czero, lit, Complex, Real};

/// Dense `U = exp(−i Ĥ dt / ħ)` over a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryPropagator<T: Real> {
    matrix: DMatrix<Complex<T>>,
    in_plane_dim: usize,
}

impl<T: Real> UnitaryPropagator<T> {
    pub fn matrix(&self) -> &DMatrix<Complex<T>> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Block acting on the first `in_plane_dim` ordinals.
    pub fn in_plane(&self) -> DMatrix<Complex<T>> {
        self.matrix.view((0, 0), (self.in_plane_dim, self.in_plane_dim)).into_owned()
    }

    /// `max |U†U − I|` over all entries.
    pub fn unitarity_defect(&self) -> T {
        let p = self.matrix.adjoint() * &self.matrix;
        let mut worst = T::zero();
        for i in 0..p.nrows() {
            for j in 0..p.ncols() {
                let target = if i == j { T::one() } else { T::zero() };
                let d = (p[(i, j)] - Complex::new(target, T::zero())).norm_sqr().sqrt();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}

/// Propagator from the eigendecomposition of the real-symmetric
/// Hamiltonian. Rows beyond `in_plane_dim` must be identically zero and map
/// to the identity.
pub fn compute_propagator<T: Real>(
    hamiltonian: &HermitianOperator<T>,
    params: &PhysicalParams<T>,
    in_plane_dim: usize,
) -> Result<UnitaryPropagator<T>> {
    compute_propagator_shifted(hamiltonian, params, in_plane_dim, T::zero())
}

/// As [`compute_propagator`], with `shift` subtracted from the in-plane
/// diagonal first. A shift of `ħω` drops the uniform global phase.
pub fn compute_propagator_shifted<T: Real>(
    hamiltonian: &HermitianOperator<T>,
    params: &PhysicalParams<T>,
    in_plane_dim: usize,
    shift: T,
) -> Result<UnitaryPropagator<T>> {
    if !hamiltonian.is_real() {
        return Err(Error::Unsupported("propagator construction expects a real-symmetric Hamiltonian".into()));
    }
    let n = hamiltonian.dim();
    let m = in_plane_dim;
    if m > n {
        return Err(Error::BasisMismatch { expected: n, found: m });
    }
    let h = hamiltonian.real_part();
    for i in m..n {
        if (0..n).any(|j| h[(i, j)] != T::zero() || h[(j, i)] != T::zero()) {
            return Err(Error::Unsupported(format!(
                "Hamiltonian couples escape ordinal {i}; propagator expects it decoupled"
            )));
        }
    }
    let mut block = h.view((0, 0), (m, m)).into_owned();
    for i in 0..m {
        block[(i, i)] -= shift;
    }
    let eig = SymmetricEigen::try_new(block, T::default_epsilon(), 100 * m.max(1))
        .ok_or_else(|| Error::Eigendecomposition(format!("no convergence for dimension {m}")))?;
    let scale = params.dt / params.hbar;
    let v = &eig.eigenvectors;
    let (mut vc, mut vs) = (v.clone(), v.clone());
    for (j, &e) in eig.eigenvalues.iter().enumerate() {
        let phase = cis(-(e * scale));
        vc.column_mut(j).scale_mut(phase.re);
        vs.column_mut(j).scale_mut(phase.im);
    }
    let re = vc * v.transpose();
    let im = vs * v.transpose();
    let mut u = DMatrix::from_element(n, n, czero());
    for j in 0..m {
        for i in 0..m {
            u[(i, j)] = Complex::new(re[(i, j)], im[(i, j)]);
        }
    }
    for i in m..n {
        u[(i, i)] = Complex::new(T::one(), T::zero());
    }
    Ok(UnitaryPropagator { matrix: u, in_plane_dim: m })
}

/// Normal modes of an open chain of `n` sites with unit hopping:
/// eigenvalues `2cos(kπ/(n+1))` and row-major eigenvectors
/// `V[j][k] = √(2/(n+1)) sin((j+1)(k+1)π/(n+1))`.
pub(crate) fn chain_modes<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let denom = (n + 1) as f64;
    let norm = (2.0 / denom).sqrt();
    let values = (0..n)
        .map(|k| {
            // exact zero for the odd-chain middle mode
            if 2 * (k + 1) == n + 1 {
                T::zero()
            } else {
                lit(2.0 * (((k + 1) as f64) * std::f64::consts::PI / denom).cos())
            }
        })
        .collect();
    let vectors = (0..n * n)
        .map(|idx| {
            let (j, k) = (idx / n, idx % n);
            let arg = ((j + 1) * (k + 1)) % (2 * (n + 1));
            lit(norm * (arg as f64 * std::f64::consts::PI / denom).sin())
        })
        .collect();
    (values, vectors)
}

/// Product eigenbasis of the uniform lattice Hamiltonian.
///
/// The in-plane Hamiltonian is `ħω·I + ζ(A_y ⊗ I + I ⊗ A_x)` with `A_x`,
/// `A_y` open-chain adjacency matrices, so its eigenvectors are
/// `V_y ⊗ V_x` with energies `ħω + ζ(λ_a + μ_b)`. Mode index is
/// `b·width + a`, mirroring the site ordinal `h·width + l`.
#[derive(Debug, Clone)]
pub struct SeparableSpectrum<T: Real> {
    width: usize,
    height: usize,
    vx: Vec<T>,
    vy: Vec<T>,
    energies: Vec<T>,
    phases: Vec<Complex<T>>,
}

impl<T: Real> SeparableSpectrum<T> {
    pub fn new(grid: GridSpec, params: &PhysicalParams<T>, rotating_frame: bool) -> Self {
        let (width, height) = (grid.width(), grid.height());
        let (lx, vx) = chain_modes::<T>(width);
        let (ly, vy) = chain_modes::<T>(height);
        let base = if rotating_frame { T::zero() } else { params.hbar * params.omega };
        let mut energies = Vec::with_capacity(width * height);
        let mut phases = Vec::with_capacity(width * height);
        let hop_phase = params.zeta * params.dt / params.hbar;
        let base_phase = base * params.dt / params.hbar;
        for &y in &ly {
            for &x in &lx {
                let band = x + y;
                energies.push(base + params.zeta * band);
                phases.push(cis(-(base_phase + hop_phase * band)));
            }
        }
        SeparableSpectrum { width, height, vx, vy, energies, phases }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dim(&self) -> usize {
        self.width * self.height
    }

    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    /// `exp(−i ε_α dt/ħ)` per mode.
    pub fn phases(&self) -> &[Complex<T>] {
        &self.phases
    }

    /// `V_x[l][a]`.
    #[inline]
    pub fn vx(&self, l: usize, a: usize) -> T {
        self.vx[l * self.width + a]
    }

    /// `V_y[h][b]`.
    #[inline]
    pub fn vy(&self, h: usize, b: usize) -> T {
        self.vy[h * self.height + b]
    }

    pub(crate) fn vx_row(&self, l: usize) -> &[T] {
        &self.vx[l * self.width..(l + 1) * self.width]
    }

    pub(crate) fn vy_row(&self, h: usize) -> &[T] {
        &self.vy[h * self.height..(h + 1) * self.height]
    }

    /// Mode amplitudes of the site-localised state `|l,h⟩`.
    pub fn site_vector(&self, l: usize, h: usize) -> Vec<T> {
        let mut out = Vec::with_capacity(self.dim());
        for b in 0..self.height {
            let y = self.vy(h, b);
            for a in 0..self.width {
                out.push(y * self.vx(l, a));
            }
        }
        out
    }

    /// Mode → site transform `(V_y ⊗ V_x) ψ̃`.
    pub fn to_sites(&self, modes: &[Complex<T>]) -> Vec<Complex<T>> {
        self.transform(modes, false)
    }

    /// Site → mode transform `(V_y ⊗ V_x)ᵀ ψ`.
    pub fn to_modes(&self, sites: &[Complex<T>]) -> Vec<Complex<T>> {
        self.transform(sites, true)
    }

    fn transform(&self, input: &[Complex<T>], transpose: bool) -> Vec<Complex<T>> {
        let (w, h) = (self.width, self.height);
        assert_eq!(input.len(), w * h);
        let vx = |i: usize, j: usize| if transpose { self.vx(j, i) } else { self.vx(i, j) };
        let vy = |i: usize, j: usize| if transpose { self.vy(j, i) } else { self.vy(i, j) };
        let mut tmp = vec![czero::<T>(); w * h];
        for r in 0..h {
            for i in 0..w {
                let mut acc = czero();
                for j in 0..w {
                    acc += input[r * w + j] * vx(i, j);
                }
                tmp[r * w + i] = acc;
            }
        }
        let mut out = vec![czero::<T>(); w * h];
        for i in 0..h {
            for j in 0..h {
                let c = vy(i, j);
                for k in 0..w {
                    out[i * w + k] += tmp[j * w + k] * c;
                }
            }
        }
        out
    }

    /// Dense in-plane Hamiltonian rebuilt from the modes, for consistency
    /// checks against direct assembly.
    pub fn reconstruct_hamiltonian(&self) -> DMatrix<T> {
        let n = self.dim();
        let w = self.width;
        let mut v = DMatrix::zeros(n, n);
        for i in 0..n {
            let (l, h) = (i % w, i / w);
            for m in 0..n {
                let (a, b) = (m % w, m / w);
                v[(i, m)] = self.vy(h, b) * self.vx(l, a);
            }
        }
        let mut scaled = v.clone();
        for (m, &e) in self.energies.iter().enumerate() {
            scaled.column_mut(m).scale_mut(e);
        }
        scaled * v.transpose()
    }
}
