//! Site-basis density and pure states with the split-step updates.
//!
//! One iteration is `ρ̃ = U ρ U†` followed by the explicit Euler step
//! `ρ = ρ̃ + (dt/ħ) L(ρ̃)`.

use nalgebra::{DMatrix, DVector};

use crate::dissipation::JumpChannelSet;
use crate::error::{Error, Result};
use crate::evolution::propagator::UnitaryPropagator;
use crate::hamiltonian::PhysicalParams;
use crate::scalar::{creal, czero, lit, Complex, Real};

/// Single-photon pure state over the in-plane ordinals.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState<T: Real> {
    amplitudes: DVector<Complex<T>>,
}

impl<T: Real> PureState<T> {
    pub fn localized(in_plane_dim: usize, ordinal: usize) -> Self {
        let mut amplitudes = DVector::from_element(in_plane_dim, czero());
        amplitudes[ordinal] = creal(T::one());
        PureState { amplitudes }
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex<T>>) -> Self {
        PureState { amplitudes: DVector::from_vec(amplitudes) }
    }

    pub fn amplitudes(&self) -> &DVector<Complex<T>> {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    pub fn site_populations(&self) -> Vec<T> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// In-plane block plus the diagonal populations of the escape states.
///
/// Exact as long as in-plane/escape coherences start at zero: Ĥ never
/// couples the two sectors and each jump maps an in-plane population
/// straight onto an escape population.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDensity<T: Real> {
    pub in_plane: DMatrix<Complex<T>>,
    pub escaped: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DensityState<T: Real> {
    Full(DMatrix<Complex<T>>),
    Block(BlockDensity<T>),
}

impl<T: Real> DensityState<T> {
    /// `|s⟩⟨s|` for in-plane ordinal `ordinal`.
    pub fn localized_full(dim: usize, ordinal: usize) -> Self {
        let mut rho = DMatrix::from_element(dim, dim, czero());
        rho[(ordinal, ordinal)] = creal(T::one());
        DensityState::Full(rho)
    }

    pub fn localized_block(in_plane_dim: usize, outside_dim: usize, ordinal: usize) -> Self {
        let mut b = DMatrix::from_element(in_plane_dim, in_plane_dim, czero());
        b[(ordinal, ordinal)] = creal(T::one());
        DensityState::Block(BlockDensity { in_plane: b, escaped: vec![T::zero(); outside_dim] })
    }

    pub fn from_pure(psi: &PureState<T>) -> Self {
        let a = psi.amplitudes();
        DensityState::Full(a * a.adjoint())
    }

    pub fn dim(&self) -> usize {
        match self {
            DensityState::Full(r) => r.nrows(),
            DensityState::Block(b) => b.in_plane.nrows() + b.escaped.len(),
        }
    }

    pub fn trace(&self) -> T {
        match self {
            DensityState::Full(r) => (0..r.nrows()).fold(T::zero(), |acc, i| acc + r[(i, i)].re),
            DensityState::Block(b) => {
                let inner = (0..b.in_plane.nrows()).fold(T::zero(), |acc, i| acc + b.in_plane[(i, i)].re);
                b.escaped.iter().fold(inner, |acc, &x| acc + x)
            }
        }
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> T {
        let sq = |m: &DMatrix<Complex<T>>| m.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
        match self {
            DensityState::Full(r) => sq(r),
            DensityState::Block(b) => b.escaped.iter().fold(sq(&b.in_plane), |acc, &x| acc + x * x),
        }
    }

    /// Diagonal over the first `in_plane_dim` ordinals.
    pub fn site_populations(&self, in_plane_dim: usize) -> Vec<T> {
        match self {
            DensityState::Full(r) => (0..in_plane_dim).map(|i| r[(i, i)].re).collect(),
            DensityState::Block(b) => (0..in_plane_dim).map(|i| b.in_plane[(i, i)].re).collect(),
        }
    }

    /// Populations of the vacuum/escape ordinals.
    pub fn outside_populations(&self, in_plane_dim: usize) -> Vec<T> {
        match self {
            DensityState::Full(r) => (in_plane_dim..r.nrows()).map(|i| r[(i, i)].re).collect(),
            DensityState::Block(b) => b.escaped.clone(),
        }
    }

    /// Dense matrix over the whole basis.
    pub fn to_full(&self) -> DMatrix<Complex<T>> {
        match self {
            DensityState::Full(r) => r.clone(),
            DensityState::Block(b) => {
                let m = b.in_plane.nrows();
                let n = m + b.escaped.len();
                let mut r = DMatrix::from_element(n, n, czero());
                r.view_mut((0, 0), (m, m)).copy_from(&b.in_plane);
                for (k, &p) in b.escaped.iter().enumerate() {
                    r[(m + k, m + k)] = creal(p);
                }
                r
            }
        }
    }
}

/// `ρ ← U ρ U†` (full) or `B ← U_in B U_in†` (block form; escape
/// populations are untouched because U is the identity there).
pub fn unitary_step<T: Real>(state: &mut DensityState<T>, u: &UnitaryPropagator<T>) -> Result<()> {
    match state {
        DensityState::Full(rho) => {
            check_dim(u.dim(), rho.nrows())?;
            let m = u.matrix();
            *rho = m * &*rho * m.adjoint();
        }
        DensityState::Block(b) => {
            check_dim(u.dim(), b.in_plane.nrows() + b.escaped.len())?;
            let m = u.in_plane();
            b.in_plane = &m * &b.in_plane * m.adjoint();
        }
    }
    Ok(())
}

/// `ψ ← U_in ψ`.
pub fn unitary_step_pure<T: Real>(psi: &mut PureState<T>, u: &UnitaryPropagator<T>) -> Result<()> {
    let m = u.in_plane();
    check_dim(m.nrows(), psi.amplitudes.len())?;
    psi.amplitudes = m * &psi.amplitudes;
    Ok(())
}

/// Euler dissipator step `ρ ← ρ + (dt/ħ) L(ρ)`.
///
/// Block form: `B_ij −= (dt/2ħ)(K_i + K_j) B_ij` and each channel adds
/// `(dt/ħ)·rate·B_ss` to its target population.
pub fn dissipative_step<T: Real>(
    state: &mut DensityState<T>,
    channels: &JumpChannelSet<T>,
    params: &PhysicalParams<T>,
) -> Result<()> {
    if channels.is_empty() {
        return Ok(());
    }
    let scale = params.dt / params.hbar;
    match state {
        DensityState::Full(rho) => {
            let inc = channels.lindblad_apply(rho)?;
            *rho += inc * creal(scale);
        }
        DensityState::Block(b) => {
            let m = b.in_plane.nrows();
            check_dim(channels.dim(), m + b.escaped.len())?;
            let k = channels.decay_weights();
            let half_scale = scale * lit::<T>(0.5);
            let diag: Vec<T> = (0..m).map(|i| b.in_plane[(i, i)].re).collect();
            for j in 0..m {
                for i in 0..m {
                    let w = k[i] + k[j];
                    if w != T::zero() {
                        let z = b.in_plane[(i, j)];
                        b.in_plane[(i, j)] = z - z * (half_scale * w);
                    }
                }
            }
            for c in channels.channels() {
                b.escaped[c.target - m] += scale * c.rate * diag[c.source];
            }
        }
    }
    Ok(())
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::BasisMismatch { expected, found })
    }
}
