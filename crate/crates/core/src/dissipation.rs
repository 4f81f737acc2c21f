//! Boundary escape channels and the Lindblad dissipator.
//!
//! Every channel is an independent rank-1 jump `A_k = |target⟩⟨source|`
//! with rate `γ`. Method A gives each boundary cavity one channel into the
//! shared vacuum; Method B gives each boundary cavity one channel per edge
//! it touches, so corners carry two.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::PhysicalParams;
use crate::lattice::{BasisSet, Boundary, Direction, Method, Site};
use crate::scalar::{lit, to_f64, Complex, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpChannel<T> {
    pub source: usize,
    pub target: usize,
    pub rate: T,
    pub site: Site,
    /// `None` for the Method-A vacuum target.
    pub direction: Option<Direction>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpChannelSet<T> {
    channels: Vec<JumpChannel<T>>,
    dim: usize,
    in_plane_dim: usize,
    decay: Vec<T>,
}

impl<T: Real> JumpChannelSet<T> {
    /// Boundary channels for `basis`; empty for a closed boundary.
    pub fn build(basis: &BasisSet, params: &PhysicalParams<T>) -> Self {
        let grid = basis.grid();
        let mut channels = Vec::new();
        if basis.boundary() == Boundary::Open {
            for site in grid.boundary_sites() {
                let source = grid.ordinal(site);
                match basis.method() {
                    Method::A => channels.push(JumpChannel {
                        source,
                        target: basis.vacuum_ordinal().expect("open Method-A basis has a vacuum"),
                        rate: params.gamma,
                        site,
                        direction: None,
                    }),
                    Method::B => {
                        for direction in grid.escape_directions(site) {
                            channels.push(JumpChannel {
                                source,
                                target: basis
                                    .escaped_ordinal(site, direction)
                                    .expect("escape state enumerated for every boundary direction"),
                                rate: params.gamma,
                                site,
                                direction: Some(direction),
                            });
                        }
                    }
                }
            }
        }
        Self::from_parts(basis, channels)
    }

    /// Wraps an explicit channel list. Sources must be in-plane ordinals and
    /// targets must be vacuum/escaped ordinals of `basis`.
    pub fn from_channels(basis: &BasisSet, channels: Vec<JumpChannel<T>>) -> Result<Self> {
        for c in &channels {
            let ok = c.source < basis.in_plane_dim()
                && c.target >= basis.in_plane_dim()
                && c.target < basis.dim()
                && to_f64(c.rate) >= 0.0;
            if !ok {
                return Err(Error::Unsupported(format!(
                    "channel {} -> {} is not an in-plane to escape transition",
                    c.source, c.target
                )));
            }
        }
        Ok(Self::from_parts(basis, channels))
    }

    fn from_parts(basis: &BasisSet, channels: Vec<JumpChannel<T>>) -> Self {
        let mut decay = vec![T::zero(); basis.dim()];
        for c in &channels {
            decay[c.source] += c.rate;
        }
        JumpChannelSet { channels, dim: basis.dim(), in_plane_dim: basis.in_plane_dim(), decay }
    }

    pub fn channels(&self) -> &[JumpChannel<T>] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn in_plane_dim(&self) -> usize {
        self.in_plane_dim
    }

    /// `K = Σ_k rate_k A_k†A_k`, stored as its diagonal over the whole basis.
    pub fn decay_weights(&self) -> &[T] {
        &self.decay
    }

    pub(crate) fn scale_decay_weights(&mut self, factor: T) {
        for k in &mut self.decay {
            *k *= factor;
        }
    }

    pub(crate) fn retain(&mut self, keep: impl FnMut(&JumpChannel<T>) -> bool) {
        self.channels.retain(keep);
        self.decay.iter_mut().for_each(|k| *k = T::zero());
        for c in &self.channels {
            self.decay[c.source] += c.rate;
        }
    }

    pub fn records(&self) -> Vec<ChannelRecord> {
        self.channels
            .iter()
            .map(|c| ChannelRecord {
                source: c.site,
                target: c.direction.map_or_else(|| "vacuum".to_string(), |d| d.to_string()),
                rate: to_f64(c.rate),
            })
            .collect()
    }

    /// `L(ρ) = Σ_k rate_k (A_k ρ A_k† − ½{A_k†A_k, ρ})` for a dense `ρ`.
    pub fn lindblad_apply(&self, rho: &DMatrix<Complex<T>>) -> Result<DMatrix<Complex<T>>> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::BasisMismatch { expected: self.dim, found: rho.nrows() });
        }
        let n = self.dim;
        let half: T = lit(0.5);
        let mut out = DMatrix::from_fn(n, n, |i, j| {
            let k = self.decay[i] + self.decay[j];
            if k == T::zero() {
                Complex::new(T::zero(), T::zero())
            } else {
                -rho[(i, j)] * (half * k)
            }
        });
        for c in &self.channels {
            out[(c.target, c.target)] += rho[(c.source, c.source)] * c.rate;
        }
        Ok(out)
    }
}

/// Serialisable view of one channel for run metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRecord {
    pub source: Site,
    pub target: String,
    pub rate: f64,
}
