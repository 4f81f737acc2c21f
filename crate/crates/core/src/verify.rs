//! Self-check suite: oracle agreement, unitarity, block/full equivalence,
//! conservation and ordering invariants.
//!
//! A [`Mutation`] deliberately breaks one piece of the physics so the
//! suite's sensitivity can itself be tested.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DVector;

use crate::dissipation::JumpChannelSet;
use crate::error::{Error, Result};
use crate::evolution::{
    compute_propagator, equivalence_check_block_vs_full, Engine, Frame, Representation, SeparableSpectrum,
    SimulationConfig,
};
use crate::hamiltonian::{
    assemble_full_space_hamiltonian, assemble_hamiltonian, restrict_to_single_excitation, HermitianOperator,
    PhysicalParams,
};
use crate::lattice::{BasisSet, Boundary, FullBasis, GridSpec, Method};
use crate::observables::symmetry_error;
use crate::scalar::Complex;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

impl FromStr for Level {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            other => Err(Error::config("level", format!("expected fast or full, got `{other}`"))),
        }
    }
}

/// Fault injected into the operators the suite evolves with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Negate the hopping amplitude between the centre site and the next ordinal.
    FlipHoppingEdge,
    /// Use `{A†A, ρ}` instead of `½{A†A, ρ}` in the dissipator.
    DropAnticommutatorHalf,
    /// Give each Method-B corner a single escape channel.
    SingleCornerChannel,
}

impl FromStr for Mutation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "flip-hopping-edge" => Ok(Mutation::FlipHoppingEdge),
            "drop-anticommutator-half" => Ok(Mutation::DropAnticommutatorHalf),
            "single-corner-channel" => Ok(Mutation::SingleCornerChannel),
            other => Err(Error::config("inject", format!("unknown mutation `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:<24} {} ({:.2}s)", self.name, self.detail, self.seconds)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Operator factory with an optional fault.
#[derive(Debug, Clone, Copy)]
struct Setup {
    params: PhysicalParams<f64>,
    mutation: Option<Mutation>,
}

impl Setup {
    fn hamiltonian(&self, basis: &BasisSet) -> HermitianOperator<f64> {
        let mut h = assemble_hamiltonian(basis, &self.params);
        if self.mutation == Some(Mutation::FlipHoppingEdge) {
            let g = basis.grid();
            let c = g.ordinal(g.center());
            if c + 1 < g.site_count() {
                h.flip_bond(c, c + 1);
            }
        }
        h
    }

    fn channels(&self, basis: &BasisSet) -> JumpChannelSet<f64> {
        let mut ch = JumpChannelSet::build(basis, &self.params);
        match self.mutation {
            Some(Mutation::DropAnticommutatorHalf) => ch.scale_decay_weights(2.0),
            Some(Mutation::SingleCornerChannel) if basis.method() == Method::B => {
                let mut seen = std::collections::HashSet::new();
                ch.retain(|c| seen.insert(c.source));
            }
            _ => {}
        }
        ch
    }

    fn mutates_hamiltonian(&self) -> bool {
        self.mutation == Some(Mutation::FlipHoppingEdge)
    }

    /// Block-density engine; the site frame is used whenever the
    /// Hamiltonian is not the uniform lattice one.
    fn engine(&self, basis: BasisSet, repr: Representation) -> Result<Engine<f64>> {
        let h = self.hamiltonian(&basis);
        let ch = self.channels(&basis);
        let frame = if self.mutates_hamiltonian() { Frame::Site } else { Frame::Spectral };
        Engine::builder(basis, self.params).hamiltonian(h).channels(ch).representation(repr).frame(frame).build()
    }
}

fn grid(w: usize, h: usize) -> GridSpec {
    GridSpec::new(w, h).expect("fixed positive extents")
}

fn timed(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    let t = Instant::now();
    let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckResult { name, passed, detail, seconds: t.elapsed().as_secs_f64() }
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Runs the suite. `Fast` trims step counts and grid sizes.
pub fn run(level: Level, mutation: Option<Mutation>) -> VerifyReport {
    run_with(level, mutation, |_| {})
}

type CheckFn<'a> = Box<dyn Fn() -> Result<(bool, String)> + 'a>;

/// As [`run`], reporting each check as it completes.
pub fn run_with(level: Level, mutation: Option<Mutation>, mut on_check: impl FnMut(&CheckResult)) -> VerifyReport {
    let setup = Setup { params: PhysicalParams::default(), mutation };
    let full = level == Level::Full;
    let checks: Vec<(&'static str, CheckFn)> = vec![
        ("dimensions", Box::new(check_dimensions)),
        ("oracle_3x3", Box::new(move || check_oracle(&setup, if full { 200 } else { 100 }))),
        ("unitarity", Box::new(move || check_unitarity(&setup))),
        ("spectral_consistency", Box::new(check_spectral_consistency)),
        ("block_vs_full_5x5", Box::new(move || check_block_vs_full(&setup, if full { 500 } else { 100 }))),
        (
            "conservation_ledger",
            Box::new(move || check_ledger(&setup, if full { 9 } else { 5 }, if full { 1500 } else { 400 })),
        ),
        ("ab_ordering_3x3", Box::new(move || check_ab_ordering(&setup, if full { 400 } else { 150 }))),
        ("closed_a_equals_b", Box::new(move || check_closed_equivalence(&setup, if full { 1000 } else { 200 }))),
        ("central_symmetry", Box::new(move || check_symmetry(&setup, if full { 1000 } else { 300 }))),
    ];
    let mut report = VerifyReport::default();
    for (name, f) in checks {
        let r = timed(name, f);
        on_check(&r);
        report.checks.push(r);
    }
    report
}

fn check_dimensions() -> Result<(bool, String)> {
    let mut checked = 0;
    let mut sizes: Vec<(usize, usize)> = (1..=8).flat_map(|w| (1..=8).map(move |h| (w, h))).collect();
    sizes.push((31, 31));
    for (w, h) in sizes {
        let g = grid(w, h);
        let n = w * h;
        let escapes = 2 * (w + h);
        for (m, b, want) in [
            (Method::A, Boundary::Closed, n),
            (Method::B, Boundary::Closed, n),
            (Method::A, Boundary::Open, n + 1),
            (Method::B, Boundary::Open, n + escapes),
        ] {
            let basis = BasisSet::enumerate(g, m, b);
            if basis.dim() != want || BasisSet::expected_dimension(g, m, b) != want {
                return Ok((false, format!("{g} {m:?} {b:?}: got {} want {want}", basis.dim())));
            }
            checked += 1;
        }
    }
    Ok((true, format!("{checked} bases")))
}

fn check_oracle(setup: &Setup, steps: usize) -> Result<(bool, String)> {
    let g = grid(3, 3);
    let full = FullBasis::enumerate(g)?;
    let params = setup.params;
    let big = assemble_full_space_hamiltonian(&full, &params);
    let basis = BasisSet::enumerate(g, Method::A, Boundary::Closed);
    let reduced = setup.hamiltonian(&basis);
    let restricted = restrict_to_single_excitation(&big, &full)?;
    if restricted != reduced {
        let mut worst = 0.0f64;
        for i in 0..reduced.dim() {
            for j in 0..reduced.dim() {
                worst = worst.max((restricted.get(i, j) - reduced.get(i, j)).norm());
            }
        }
        return Ok((false, format!("restricted operator differs, max entry deviation {worst:.3e}")));
    }
    let dense = HermitianOperator::from_matrix(big.to_dense())?;
    let u_big = compute_propagator(&dense, &params, full.dim())?;
    let start = g.ordinal(g.center());
    let mut psi = DVector::from_element(full.dim(), Complex::new(0.0, 0.0));
    psi[1 << start] = Complex::new(1.0, 0.0);
    let mut engine = Engine::builder(basis, params)
        .hamiltonian(reduced)
        .representation(Representation::PureState)
        .frame(Frame::Site)
        .build()?;
    let mut worst = 0.0f64;
    for _ in 0..steps {
        psi = u_big.matrix() * &psi;
        engine.step();
        let oracle: Vec<f64> = (0..g.site_count()).map(|i| psi[1 << i].norm_sqr()).collect();
        worst = worst.max(max_dev(&oracle, &engine.site_populations()));
    }
    Ok((worst <= 1e-10, format!("entrywise equal; {steps}-step max deviation {worst:.3e}")))
}

fn check_unitarity(setup: &Setup) -> Result<(bool, String)> {
    let basis = BasisSet::enumerate(grid(7, 7), Method::B, Boundary::Open);
    let h = setup.hamiltonian(&basis);
    let u = compute_propagator(&h, &setup.params, basis.in_plane_dim())?;
    let d = u.unitarity_defect();
    Ok((d <= 1e-12, format!("max |U†U − I| = {d:.3e}")))
}

fn check_spectral_consistency() -> Result<(bool, String)> {
    let params = PhysicalParams::<f64>::default();
    let mut worst = 0.0f64;
    for (w, h) in [(5, 7), (6, 4), (1, 5)] {
        let g = grid(w, h);
        let basis = BasisSet::enumerate(g, Method::A, Boundary::Closed);
        let reference = assemble_hamiltonian(&basis, &params);
        let rebuilt = SeparableSpectrum::new(g, &params, false).reconstruct_hamiltonian();
        for i in 0..g.site_count() {
            for j in 0..g.site_count() {
                worst = worst.max((rebuilt[(i, j)] - reference.get(i, j).re).abs() / params.omega);
            }
        }
    }
    Ok((worst <= 1e-12, format!("relative reconstruction error {worst:.3e}")))
}

fn check_block_vs_full(setup: &Setup, steps: usize) -> Result<(bool, String)> {
    if setup.mutation.is_none() {
        let mut worst = 0.0f64;
        for m in [Method::A, Method::B] {
            let c = SimulationConfig::<f64>::new(grid(5, 5), m, Boundary::Open);
            let r = equivalence_check_block_vs_full(&c, steps, 1e-10)?;
            worst = worst.max(r.max_site_deviation).max(r.max_escaped_deviation);
        }
        return Ok((worst <= 1e-10, format!("{steps} steps, max deviation {worst:.3e}")));
    }
    let mut worst = 0.0f64;
    for m in [Method::A, Method::B] {
        let basis = BasisSet::enumerate(grid(5, 5), m, Boundary::Open);
        let mut block = setup.engine(basis.clone(), Representation::BlockDensity)?;
        let mut dense = setup.engine(basis, Representation::FullDensity)?;
        for _ in 0..steps {
            block.step();
            dense.step();
            worst = worst
                .max(max_dev(&block.site_populations(), &dense.site_populations()))
                .max(max_dev(&block.outside_populations(), &dense.outside_populations()));
        }
    }
    Ok((worst <= 1e-10, format!("{steps} steps, max deviation {worst:.3e}")))
}

fn check_ledger(setup: &Setup, size: usize, steps: usize) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for m in [Method::A, Method::B] {
        let mut e =
            setup.engine(BasisSet::enumerate(grid(size, size), m, Boundary::Open), Representation::BlockDensity)?;
        for _ in 0..steps {
            e.step();
            let total: f64 = e.site_populations().iter().sum::<f64>() + e.dissipative_probability();
            worst = worst.max((total - 1.0).abs());
        }
    }
    Ok((worst <= 1e-9, format!("{size}x{size}, {steps} steps, max |Σ − 1| = {worst:.3e}")))
}

fn check_ab_ordering(setup: &Setup, steps: usize) -> Result<(bool, String)> {
    let g = grid(3, 3);
    let mut a = setup.engine(BasisSet::enumerate(g, Method::A, Boundary::Open), Representation::BlockDensity)?;
    let mut b = setup.engine(BasisSet::enumerate(g, Method::B, Boundary::Open), Representation::BlockDensity)?;
    let want_channels = (g.boundary_sites().len(), 2 * (g.width() + g.height()));
    let got_channels = (a.channels().len(), b.channels().len());
    if got_channels != want_channels {
        return Ok((false, format!("channel counts {got_channels:?}, expected {want_channels:?}")));
    }
    let mut min_gap = f64::INFINITY;
    for step in 1..=steps {
        a.step();
        b.step();
        let (da, db) = (a.dissipative_probability(), b.dissipative_probability());
        let (ia, ib) = (a.in_plane_total(), b.in_plane_total());
        if db < da - 1e-12 || ia < ib - 1e-12 {
            return Ok((false, format!("ordering violated at step {step}: A {da:.6e}/{ia:.6e}, B {db:.6e}/{ib:.6e}")));
        }
        if step >= 10 {
            min_gap = min_gap.min(db - da);
        }
    }
    Ok((min_gap > 1e-9, format!("min B − A dissipative gap after step 10: {min_gap:.3e}")))
}

fn check_closed_equivalence(setup: &Setup, steps: usize) -> Result<(bool, String)> {
    let g = grid(9, 9);
    let mut a = setup.engine(BasisSet::enumerate(g, Method::A, Boundary::Closed), Representation::BlockDensity)?;
    let mut b = setup.engine(BasisSet::enumerate(g, Method::B, Boundary::Closed), Representation::BlockDensity)?;
    let mut worst = 0.0f64;
    for _ in 0..steps {
        a.step();
        b.step();
        worst = worst.max(max_dev(&a.site_populations(), &b.site_populations()));
    }
    Ok((worst <= 1e-12, format!("{steps} steps, max deviation {worst:.3e}")))
}

fn check_symmetry(setup: &Setup, steps: usize) -> Result<(bool, String)> {
    let g = grid(9, 9);
    let mut worst = 0.0f64;
    for (m, bnd) in [(Method::A, Boundary::Closed), (Method::A, Boundary::Open), (Method::B, Boundary::Open)] {
        let mut e = setup.engine(BasisSet::enumerate(g, m, bnd), Representation::BlockDensity)?;
        for step in 1..=steps {
            e.step();
            if step % 50 == 0 {
                worst = worst.max(symmetry_error(&e.site_field()));
            }
        }
    }
    Ok((worst <= 1e-10, format!("max symmetry error {worst:.3e}")))
}
