//! Split-step integration: one unitary step followed by one explicit Euler
//! dissipator step per iteration.
//!
//! [`Engine`] owns the evolving state in one of five kernels:
//!
//! | representation | frame    | storage                                  |
//! |----------------|----------|------------------------------------------|
//! | full density   | site     | dense ρ over the whole basis             |
//! | block density  | site     | dense in-plane block + escape populations |
//! | block density  | spectral | in-plane block in the lattice eigenbasis |
//! | pure state     | site     | in-plane amplitudes                      |
//! | pure state     | spectral | mode amplitudes                          |
//!
//! The spectral frame needs the uniform lattice Hamiltonian; site-frame
//! kernels accept any real-symmetric Hamiltonian.

pub mod propagator;
pub mod spectral;
pub mod state;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dissipation::JumpChannelSet;
use crate::error::{Error, Result};
use crate::hamiltonian::{assemble_hamiltonian, HermitianOperator, PhysicalParams};
use crate::lattice::{BasisSet, Boundary, GridSpec, Method, Site};
use crate::observables::{
    column_marginal, dissipative_probability, global_max_probability, symmetry_error, SeriesPoint,
    SiteProbabilityField, Snapshot,
};
use crate::scalar::{abs, lit, Real};

pub use propagator::{compute_propagator, compute_propagator_shifted, SeparableSpectrum, UnitaryPropagator};
pub use spectral::{SpectralBlock, SpectralPure};
pub use state::{dissipative_step, unitary_step, unitary_step_pure, BlockDensity, DensityState, PureState};

/// Snapshot steps used when none are given.
pub const DEFAULT_SNAPSHOTS: [usize; 8] = [300, 400, 500, 750, 1000, 2000, 5000, 10000];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    #[serde(rename = "full")]
    FullDensity,
    #[serde(rename = "block")]
    BlockDensity,
    #[serde(rename = "pure")]
    PureState,
}

impl FromStr for Representation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Ok(Representation::FullDensity),
            "block" => Ok(Representation::BlockDensity),
            "pure" => Ok(Representation::PureState),
            other => Err(Error::config("repr", format!("expected full, block or pure, got `{other}`"))),
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Representation::FullDensity => "full",
            Representation::BlockDensity => "block",
            Representation::PureState => "pure",
        })
    }
}

/// Basis in which block and pure kernels store the in-plane sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Spectral,
    Site,
}

impl FromStr for Frame {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "spectral" => Ok(Frame::Spectral),
            "site" => Ok(Frame::Site),
            other => Err(Error::config("frame", format!("expected spectral or site, got `{other}`"))),
        }
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Frame::Spectral => "spectral",
            Frame::Site => "site",
        })
    }
}

enum Kernel<T: Real> {
    Full { u: UnitaryPropagator<T>, state: DensityState<T> },
    BlockSite { u: UnitaryPropagator<T>, state: DensityState<T> },
    BlockSpectral(SpectralBlock<T>),
    PureSite { u: UnitaryPropagator<T>, psi: PureState<T> },
    PureSpectral(SpectralPure<T>),
}

pub struct EngineBuilder<T: Real> {
    basis: Arc<BasisSet>,
    params: PhysicalParams<T>,
    hamiltonian: Option<HermitianOperator<T>>,
    channels: Option<JumpChannelSet<T>>,
    representation: Representation,
    frame: Frame,
    initial_site: Option<Site>,
    rotating_frame: bool,
}

impl<T: Real> EngineBuilder<T> {
    pub fn hamiltonian(mut self, h: HermitianOperator<T>) -> Self {
        self.hamiltonian = Some(h);
        self
    }

    pub fn channels(mut self, c: JumpChannelSet<T>) -> Self {
        self.channels = Some(c);
        self
    }

    pub fn representation(mut self, r: Representation) -> Self {
        self.representation = r;
        self
    }

    pub fn frame(mut self, f: Frame) -> Self {
        self.frame = f;
        self
    }

    pub fn initial_site(mut self, s: Site) -> Self {
        self.initial_site = Some(s);
        self
    }

    /// Drop the uniform `ħω` phase from the propagator.
    pub fn rotating_frame(mut self, on: bool) -> Self {
        self.rotating_frame = on;
        self
    }

    pub fn build(self) -> Result<Engine<T>> {
        let basis = self.basis;
        let params = self.params;
        params.validate()?;
        let grid = basis.grid();
        let n = basis.in_plane_dim();
        let site = self.initial_site.unwrap_or_else(|| grid.center());
        let start = basis.site_ordinal(site)?;
        let channels = self.channels.unwrap_or_else(|| JumpChannelSet::build(&basis, &params));
        if channels.dim() != basis.dim() {
            return Err(Error::BasisMismatch { expected: basis.dim(), found: channels.dim() });
        }
        let assembled = || assemble_hamiltonian(&basis, &params);
        let shift = if self.rotating_frame { params.hbar * params.omega } else { T::zero() };
        let pure = self.representation == Representation::PureState;
        if pure && (basis.boundary() == Boundary::Open || !channels.is_empty()) {
            return Err(Error::config("repr", "pure-state evolution needs a closed boundary"));
        }
        let spectral = self.frame == Frame::Spectral && self.representation != Representation::FullDensity;
        let kernel = if spectral {
            if let Some(h) = &self.hamiltonian {
                if h != &assembled() {
                    return Err(Error::Unsupported(
                        "spectral frame requires the uniform lattice Hamiltonian; use the site frame".into(),
                    ));
                }
            }
            let sp = Arc::new(SeparableSpectrum::new(grid, &params, self.rotating_frame));
            if pure {
                Kernel::PureSpectral(SpectralPure::new(sp, site))
            } else {
                Kernel::BlockSpectral(SpectralBlock::new(sp, grid, &channels, &params, site)?)
            }
        } else {
            let h = self.hamiltonian.unwrap_or_else(assembled);
            if h.dim() != basis.dim() {
                return Err(Error::BasisMismatch { expected: basis.dim(), found: h.dim() });
            }
            let u = compute_propagator_shifted(&h, &params, n, shift)?;
            match self.representation {
                Representation::FullDensity => {
                    Kernel::Full { u, state: DensityState::localized_full(basis.dim(), start) }
                }
                Representation::BlockDensity => {
                    Kernel::BlockSite { u, state: DensityState::localized_block(n, basis.outside_dim(), start) }
                }
                Representation::PureState => Kernel::PureSite { u, psi: PureState::localized(n, start) },
            }
        };
        Ok(Engine { basis, params, channels, kernel, steps: 0 })
    }
}

/// A single trajectory being integrated.
pub struct Engine<T: Real> {
    basis: Arc<BasisSet>,
    params: PhysicalParams<T>,
    channels: JumpChannelSet<T>,
    kernel: Kernel<T>,
    steps: usize,
}

impl<T: Real> Engine<T> {
    /// Builder with the assembled Hamiltonian, the standard channels, the
    /// spectral block kernel and the centre site as defaults.
    pub fn builder(basis: impl Into<Arc<BasisSet>>, params: PhysicalParams<T>) -> EngineBuilder<T> {
        EngineBuilder {
            basis: basis.into(),
            params,
            hamiltonian: None,
            channels: None,
            representation: Representation::BlockDensity,
            frame: Frame::Spectral,
            initial_site: None,
            rotating_frame: false,
        }
    }

    pub fn basis(&self) -> &BasisSet {
        &self.basis
    }

    pub fn params(&self) -> &PhysicalParams<T> {
        &self.params
    }

    pub fn channels(&self) -> &JumpChannelSet<T> {
        &self.channels
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    pub fn time(&self) -> T {
        self.params.dt * lit(self.steps as f64)
    }

    /// One iteration: unitary step, then the dissipator step when open.
    pub fn step(&mut self) {
        const FIXED: &str = "operator dimensions fixed at construction";
        match &mut self.kernel {
            Kernel::Full { u, state } | Kernel::BlockSite { u, state } => {
                unitary_step(state, u).expect(FIXED);
                dissipative_step(state, &self.channels, &self.params).expect(FIXED);
            }
            Kernel::BlockSpectral(s) => s.step(),
            Kernel::PureSite { u, psi } => unitary_step_pure(psi, u).expect(FIXED),
            Kernel::PureSpectral(s) => s.step(),
        }
        self.steps += 1;
    }

    pub fn advance(&mut self, steps: usize) {
        for _ in 0..steps {
            self.step();
        }
    }

    pub fn site_populations(&self) -> Vec<T> {
        let n = self.basis.in_plane_dim();
        match &self.kernel {
            Kernel::Full { state, .. } | Kernel::BlockSite { state, .. } => state.site_populations(n),
            Kernel::BlockSpectral(s) => s.site_populations(),
            Kernel::PureSite { psi, .. } => psi.site_populations(),
            Kernel::PureSpectral(s) => s.site_amplitudes().iter().map(|z| z.norm_sqr()).collect(),
        }
    }

    pub fn site_field(&self) -> SiteProbabilityField<T> {
        SiteProbabilityField::new(self.basis.grid(), self.site_populations())
            .expect("population vector matches the grid")
    }

    /// Vacuum/escape populations in basis order (empty when closed).
    pub fn outside_populations(&self) -> Vec<T> {
        let n = self.basis.in_plane_dim();
        match &self.kernel {
            Kernel::Full { state, .. } | Kernel::BlockSite { state, .. } => state.outside_populations(n),
            Kernel::BlockSpectral(s) => s.escaped().to_vec(),
            Kernel::PureSite { .. } | Kernel::PureSpectral(_) => Vec::new(),
        }
    }

    pub fn dissipative_probability(&self) -> T {
        dissipative_probability(&self.outside_populations(), &self.basis)
    }

    /// Probability still in the lattice, `Σ_sites P`, without a site readout.
    pub fn in_plane_total(&self) -> T {
        let n = self.basis.in_plane_dim();
        match &self.kernel {
            Kernel::Full { state, .. } | Kernel::BlockSite { state, .. } => {
                state.site_populations(n).iter().fold(T::zero(), |a, &p| a + p)
            }
            Kernel::BlockSpectral(s) => s.in_plane_trace(),
            Kernel::PureSite { psi, .. } => psi.norm_sqr(),
            Kernel::PureSpectral(s) => s.norm_sqr(),
        }
    }

    /// Total trace (in-plane plus escape); the squared norm for pure states.
    pub fn trace(&self) -> T {
        match &self.kernel {
            Kernel::Full { state, .. } | Kernel::BlockSite { state, .. } => state.trace(),
            Kernel::BlockSpectral(s) => s.trace(),
            Kernel::PureSite { psi, .. } => psi.norm_sqr(),
            Kernel::PureSpectral(s) => s.norm_sqr(),
        }
    }

    /// `tr ρ²`; for pure states the squared norm squared.
    pub fn purity(&self) -> T {
        match &self.kernel {
            Kernel::Full { state, .. } | Kernel::BlockSite { state, .. } => state.purity(),
            Kernel::BlockSpectral(s) => s.purity(),
            Kernel::PureSite { psi, .. } => psi.norm_sqr() * psi.norm_sqr(),
            Kernel::PureSpectral(s) => s.norm_sqr() * s.norm_sqr(),
        }
    }

    /// Dense density matrix over the whole basis in the site frame, when the
    /// kernel stores one.
    pub fn density_matrix(&self) -> Option<nalgebra::DMatrix<crate::scalar::Complex<T>>> {
        match &self.kernel {
            Kernel::Full { state, .. } | Kernel::BlockSite { state, .. } => Some(state.to_full()),
            _ => None,
        }
    }

    pub fn snapshot(&self) -> Snapshot<T> {
        let field = self.site_field();
        let outside = self.outside_populations();
        let column_marginal = column_marginal(&field);
        Snapshot {
            step: self.steps,
            time: self.time(),
            column_marginal,
            dissipative_probability: dissipative_probability(&outside, &self.basis),
            in_plane_total: field.total(),
            trace: self.trace(),
            max_site_probability: field.max(),
            outside,
            field,
        }
    }

    pub fn series_point(&self) -> SeriesPoint<T> {
        let field = self.site_field();
        SeriesPoint {
            step: self.steps,
            time: self.time(),
            trace: self.trace(),
            in_plane_total: field.total(),
            dissipative_probability: self.dissipative_probability(),
            max_site_probability: field.max(),
            symmetry_error: symmetry_error(&field),
            purity: self.purity(),
        }
    }
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationConfig<T> {
    pub grid: GridSpec,
    pub method: Method,
    pub boundary: Boundary,
    pub params: PhysicalParams<T>,
    pub total_steps: usize,
    pub snapshot_steps: Vec<usize>,
    pub representation: Representation,
    pub frame: Frame,
    pub rotating_frame: bool,
    /// Sample the time series every this many steps; 0 disables it.
    pub timeseries_stride: usize,
    pub initial_site: Option<Site>,
}

impl<T: Real> SimulationConfig<T> {
    /// Defaults: 10⁴ steps, the standard snapshot list, spectral block
    /// kernel, time series every 10 steps.
    pub fn new(grid: GridSpec, method: Method, boundary: Boundary) -> Self {
        SimulationConfig {
            grid,
            method,
            boundary,
            params: PhysicalParams::default(),
            total_steps: 10_000,
            snapshot_steps: DEFAULT_SNAPSHOTS.to_vec(),
            representation: Representation::BlockDensity,
            frame: Frame::Spectral,
            rotating_frame: false,
            timeseries_stride: 10,
            initial_site: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.representation == Representation::PureState && self.boundary == Boundary::Open {
            return Err(Error::config("repr", "pure-state evolution needs a closed boundary"));
        }
        if self.snapshot_steps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("snapshots", "steps must be strictly increasing"));
        }
        if let Some(&last) = self.snapshot_steps.last() {
            if last > self.total_steps {
                return Err(Error::config(
                    "snapshots",
                    format!("step {last} exceeds the {} total steps", self.total_steps),
                ));
            }
        }
        if let Some(s) = self.initial_site {
            if !self.grid.contains(s) {
                return Err(Error::config("initial_site", format!("{s} is outside {}", self.grid)));
            }
        }
        Ok(())
    }

    pub fn basis(&self) -> BasisSet {
        BasisSet::enumerate(self.grid, self.method, self.boundary)
    }

    pub fn cast<U: Real>(&self) -> SimulationConfig<U> {
        SimulationConfig {
            grid: self.grid,
            method: self.method,
            boundary: self.boundary,
            params: self.params.cast(),
            total_steps: self.total_steps,
            snapshot_steps: self.snapshot_steps.clone(),
            representation: self.representation,
            frame: self.frame,
            rotating_frame: self.rotating_frame,
            timeseries_stride: self.timeseries_stride,
            initial_site: self.initial_site,
        }
    }

    pub fn engine(&self) -> Result<Engine<T>> {
        self.validate()?;
        let mut b = Engine::builder(self.basis(), self.params)
            .representation(self.representation)
            .frame(self.frame)
            .rotating_frame(self.rotating_frame);
        if let Some(s) = self.initial_site {
            b = b.initial_site(s);
        }
        b.build()
    }
}

/// Snapshots and sampled series from one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub snapshots: Vec<Snapshot<T>>,
    pub series: Vec<SeriesPoint<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn global_max_probability(&self) -> Result<T> {
        global_max_probability(&self.snapshots)
    }

    pub fn snapshot_at(&self, step: usize) -> Option<&Snapshot<T>> {
        self.snapshots.iter().find(|s| s.step == step)
    }
}

/// Progress notifications from [`evolve_with`].
pub enum Event<'a, T> {
    Snapshot(&'a Snapshot<T>),
    Series(&'a SeriesPoint<T>),
    Progress { step: usize, total: usize },
}

pub fn evolve<T: Real>(config: &SimulationConfig<T>) -> Result<Trajectory<T>> {
    evolve_with(config, |_| Ok(()))
}

/// Runs `config`, calling `observe` for every snapshot, every series sample
/// and every 1000 steps.
pub fn evolve_with<T: Real>(
    config: &SimulationConfig<T>,
    mut observe: impl FnMut(Event<'_, T>) -> Result<()>,
) -> Result<Trajectory<T>> {
    let mut engine = config.engine()?;
    let mut snapshots = Vec::with_capacity(config.snapshot_steps.len());
    let mut series = Vec::new();
    let mut next = config.snapshot_steps.iter().peekable();
    let stride = config.timeseries_stride;
    for step in 0..=config.total_steps {
        if step > 0 {
            engine.step();
        }
        if next.peek() == Some(&&step) {
            next.next();
            let s = engine.snapshot();
            observe(Event::Snapshot(&s))?;
            snapshots.push(s);
        }
        if stride > 0 && (step % stride == 0 || step == config.total_steps) {
            let p = engine.series_point();
            observe(Event::Series(&p))?;
            series.push(p);
        }
        if step > 0 && step % 1000 == 0 {
            observe(Event::Progress { step, total: config.total_steps })?;
        }
    }
    Ok(Trajectory { snapshots, series })
}

/// Outcome of running the block kernel against the dense full-density one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub steps: usize,
    pub max_site_deviation: f64,
    pub max_escaped_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Integrates `config` with the block kernel (in `config.frame`) and the
/// full-density kernel side by side, tracking the largest deviation in
/// site probabilities and escape populations over every step.
pub fn equivalence_check_block_vs_full<T: Real>(
    config: &SimulationConfig<T>,
    steps: usize,
    tolerance: f64,
) -> Result<EquivalenceReport> {
    if config.grid.width() > 9 || config.grid.height() > 9 {
        return Err(Error::Unsupported("block/full equivalence check is limited to grids up to 9x9".into()));
    }
    if steps > 2000 {
        return Err(Error::Unsupported("block/full equivalence check is limited to 2000 steps".into()));
    }
    if config.boundary == Boundary::Closed {
        return Ok(EquivalenceReport {
            steps,
            max_site_deviation: 0.0,
            max_escaped_deviation: 0.0,
            tolerance,
            passed: true,
        });
    }
    let block_cfg = SimulationConfig { representation: Representation::BlockDensity, ..config.clone() };
    let full_cfg = SimulationConfig { representation: Representation::FullDensity, ..config.clone() };
    let mut block = block_cfg.engine()?;
    let mut full = full_cfg.engine()?;
    let (mut site_dev, mut esc_dev) = (T::zero(), T::zero());
    for _ in 0..steps {
        block.step();
        full.step();
        for (a, b) in block.site_populations().iter().zip(full.site_populations()) {
            let d = abs(*a - b);
            if d > site_dev {
                site_dev = d;
            }
        }
        for (a, b) in block.outside_populations().iter().zip(full.outside_populations()) {
            let d = abs(*a - b);
            if d > esc_dev {
                esc_dev = d;
            }
        }
    }
    let (s, e) = (crate::scalar::to_f64(site_dev), crate::scalar::to_f64(esc_dev));
    Ok(EquivalenceReport {
        steps,
        max_site_deviation: s,
        max_escaped_deviation: e,
        tolerance,
        passed: s <= tolerance && e <= tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(w: usize, h: usize) -> GridSpec {
        GridSpec::new(w, h).unwrap()
    }

    #[test]
    fn config_validation() {
        let mut c = SimulationConfig::<f64>::new(grid(5, 5), Method::A, Boundary::Open);
        c.representation = Representation::PureState;
        assert!(matches!(c.validate(), Err(Error::Config { ref field, .. }) if field == "repr"));
        let mut c = SimulationConfig::<f64>::new(grid(5, 5), Method::A, Boundary::Closed);
        c.total_steps = 100;
        assert!(matches!(c.validate(), Err(Error::Config { ref field, .. }) if field == "snapshots"));
        c.snapshot_steps = vec![50, 20];
        assert!(c.validate().is_err());
        c.snapshot_steps = vec![0, 20, 100];
        assert!(c.validate().is_ok());
    }

    #[test]
    fn evolve_records_requested_snapshots() {
        let mut c = SimulationConfig::<f64>::new(grid(5, 5), Method::B, Boundary::Open);
        c.total_steps = 200;
        c.snapshot_steps = vec![0, 50, 200];
        c.timeseries_stride = 25;
        let t = evolve(&c).unwrap();
        assert_eq!(t.snapshots.iter().map(|s| s.step).collect::<Vec<_>>(), vec![0, 50, 200]);
        assert_eq!(t.series.len(), 9);
        assert!((t.snapshots[0].field.get(2, 2) - 1.0).abs() < 1e-14);
        let last = &t.snapshots[2];
        assert!((last.in_plane_total + last.dissipative_probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernels_agree_on_closed_grid() {
        let b = BasisSet::enumerate(grid(4, 5), Method::A, Boundary::Closed);
        let p = PhysicalParams::<f64>::default();
        let mut engines: Vec<Engine<f64>> = [
            (Representation::FullDensity, Frame::Site),
            (Representation::BlockDensity, Frame::Site),
            (Representation::BlockDensity, Frame::Spectral),
            (Representation::PureState, Frame::Site),
            (Representation::PureState, Frame::Spectral),
        ]
        .iter()
        .map(|&(r, f)| Engine::builder(b.clone(), p).representation(r).frame(f).build().unwrap())
        .collect();
        for e in &mut engines {
            e.advance(150);
        }
        let reference = engines[0].site_populations();
        for e in &engines[1..] {
            for (x, y) in e.site_populations().iter().zip(&reference) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rotating_frame_leaves_populations_unchanged() {
        let b = BasisSet::enumerate(grid(3, 3), Method::B, Boundary::Open);
        let p = PhysicalParams::<f64>::default();
        for frame in [Frame::Site, Frame::Spectral] {
            let mut lab = Engine::builder(b.clone(), p).frame(frame).build().unwrap();
            let mut rot = Engine::builder(b.clone(), p).frame(frame).rotating_frame(true).build().unwrap();
            lab.advance(100);
            rot.advance(100);
            for (x, y) in lab.site_populations().iter().zip(rot.site_populations()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spectral_frame_refuses_foreign_hamiltonian() {
        let b = BasisSet::enumerate(grid(3, 3), Method::A, Boundary::Closed);
        let p = PhysicalParams::<f64>::default();
        let mut h = assemble_hamiltonian(&b, &p);
        h.flip_bond(0, 1);
        assert!(Engine::builder(b.clone(), p).hamiltonian(h.clone()).build().is_err());
        assert!(Engine::builder(b, p).hamiltonian(h).frame(Frame::Site).build().is_ok());
    }

    #[test]
    fn equivalence_check_limits() {
        let c = SimulationConfig::<f64>::new(grid(11, 3), Method::A, Boundary::Open);
        assert!(equivalence_check_block_vs_full(&c, 10, 1e-10).is_err());
        let c = SimulationConfig::<f64>::new(grid(3, 3), Method::A, Boundary::Closed);
        assert!(equivalence_check_block_vs_full(&c, 10, 1e-10).unwrap().passed);
        let c = SimulationConfig::<f64>::new(grid(3, 3), Method::B, Boundary::Open);
        let r = equivalence_check_block_vs_full(&c, 100, 1e-10).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn f32_engine_runs() {
        let b = BasisSet::enumerate(grid(5, 5), Method::B, Boundary::Open);
        let p: PhysicalParams<f32> = PhysicalParams::<f64>::default().cast();
        let mut e = Engine::builder(b, p).build().unwrap();
        e.advance(200);
        assert!((e.trace() - 1.0).abs() < 1e-4);
        assert!(e.dissipative_probability() > 0.0);
    }
}
