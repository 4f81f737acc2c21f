//! Single-photon transport on a rectangular lattice of coupled cavities.
//!
//! The photon hops between nearest neighbours with coupling `ζ` and, on an
//! open lattice, leaks out through the boundary at rate `γ`. Two ways of
//! counting the escape channels are provided ([`Method::A`] routes every
//! boundary site to a single vacuum state, [`Method::B`] gives each outward
//! direction its own state). States are integrated with a split-step scheme:
//! exact unitary propagation followed by an explicit Euler step of the
//! dissipator.
//!
//! ```
//! use photon_lattice::{Boundary, GridSpec, Method, SimulationConfig64, evolve};
//!
//! let mut cfg = SimulationConfig64::new(GridSpec::new(7, 7).unwrap(), Method::B, Boundary::Open);
//! cfg.total_steps = 300;
//! cfg.snapshot_steps = vec![300];
//! let run = evolve(&cfg).unwrap();
//! let s = &run.snapshots[0];
//! assert!((s.in_plane_total + s.dissipative_probability - 1.0).abs() < 1e-12);
//! ```

pub mod cli;
pub mod dissipation;
pub mod error;
pub mod evolution;
pub mod hamiltonian;
pub mod lattice;
pub mod observables;
pub mod output;
pub mod scalar;
pub mod verify;

pub use dissipation::{ChannelRecord, JumpChannel, JumpChannelSet};
pub use error::{Error, Result};
pub use evolution::{
    equivalence_check_block_vs_full, evolve, evolve_with, Engine, EquivalenceReport, Event, Frame, Representation,
    SimulationConfig, Trajectory, DEFAULT_SNAPSHOTS,
};
pub use hamiltonian::{
    assemble_full_space_hamiltonian, assemble_hamiltonian, restrict_to_single_excitation, FullSpaceOperator,
    HermitianOperator, PhysicalParams,
};
pub use lattice::{
    BasisDescriptor, BasisSet, BasisState, Boundary, Direction, FullBasis, GridSpec, Method, Occupancy, Site,
    ORACLE_MAX_SITES,
};
pub use observables::{
    column_marginal, dissipative_probability, global_max_probability, symmetry_error, SeriesPoint,
    SiteProbabilityField, Snapshot,
};
pub use scalar::{Complex, Real};

pub type Engine64 = Engine<f64>;
pub type Engine32 = Engine<f32>;
pub type PhysicalParams64 = PhysicalParams<f64>;
pub type PhysicalParams32 = PhysicalParams<f32>;
pub type SimulationConfig64 = SimulationConfig<f64>;
pub type SimulationConfig32 = SimulationConfig<f32>;
pub type HermitianOperator64 = HermitianOperator<f64>;
pub type JumpChannelSet64 = JumpChannelSet<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type Snapshot64 = Snapshot<f64>;
pub type SiteProbabilityField64 = SiteProbabilityField<f64>;
