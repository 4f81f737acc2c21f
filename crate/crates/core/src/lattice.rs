//! Grid geometry and the reduced single-photon bases.
//!
//! Sites are addressed by `(l, h)` with `l ∈ [0, width)` horizontal and
//! `h ∈ [0, height)` vertical. In-plane basis ordinals are row-major with
//! `h` as the outer index: `ordinal = h·width + l`. Escape states (Method B)
//! or the shared vacuum (Method A) are appended after the `width·height`
//! in-plane states.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest cavity count for which the full occupation space is enumerated.
pub const ORACLE_MAX_SITES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub l: usize,
    pub h: usize,
}

impl Site {
    pub const fn new(l: usize, h: usize) -> Self {
        Site { l, h }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.l, self.h)
    }
}

/// Rectangular lattice extent: `width` cavities along `l`, `height` along `h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    width: usize,
    height: usize,
}

impl GridSpec {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidGrid { width, height });
        }
        Ok(GridSpec { width, height })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn site_count(&self) -> usize {
        self.width * self.height
    }

    pub fn contains(&self, s: Site) -> bool {
        s.l < self.width && s.h < self.height
    }

    fn check(&self, s: Site) -> Result<()> {
        if self.contains(s) {
            Ok(())
        } else {
            Err(Error::SiteOutOfRange { site: s, width: self.width, height: self.height })
        }
    }

    /// Row-major ordinal of a site (`h` outer, `l` inner).
    #[inline]
    pub fn ordinal(&self, s: Site) -> usize {
        debug_assert!(self.contains(s));
        s.h * self.width + s.l
    }

    #[inline]
    pub fn site(&self, ordinal: usize) -> Site {
        debug_assert!(ordinal < self.site_count());
        Site::new(ordinal % self.width, ordinal / self.width)
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.site_count()).map(move |i| self.site(i))
    }

    /// Nearest neighbours in the order left, right, down, up (when present).
    pub fn neighbors(&self, s: Site) -> Result<Vec<Site>> {
        self.check(s)?;
        let mut out = Vec::with_capacity(4);
        if s.l > 0 {
            out.push(Site::new(s.l - 1, s.h));
        }
        if s.l + 1 < self.width {
            out.push(Site::new(s.l + 1, s.h));
        }
        if s.h > 0 {
            out.push(Site::new(s.l, s.h - 1));
        }
        if s.h + 1 < self.height {
            out.push(Site::new(s.l, s.h + 1));
        }
        Ok(out)
    }

    /// Unordered nearest-neighbour pairs as `(ordinal, ordinal)` with the
    /// smaller ordinal first. Horizontal bonds come before vertical ones.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for h in 0..self.height {
            for l in 0..self.width.saturating_sub(1) {
                out.push((self.ordinal(Site::new(l, h)), self.ordinal(Site::new(l + 1, h))));
            }
        }
        for h in 0..self.height.saturating_sub(1) {
            for l in 0..self.width {
                out.push((self.ordinal(Site::new(l, h)), self.ordinal(Site::new(l, h + 1))));
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.height * (self.width - 1) + self.width * (self.height - 1)
    }

    /// Centre cavity, `((L−1)/2, (H−1)/2)` with floor division.
    pub fn center(&self) -> Site {
        Site::new((self.width - 1) / 2, (self.height - 1) / 2)
    }

    pub fn is_boundary(&self, s: Site) -> bool {
        !self.escape_directions(s).is_empty()
    }

    /// Directions through which a photon at `s` can leave the plane, in the
    /// order left, right, down, up. A 1-wide grid puts every site on both
    /// the left and the right edge.
    pub fn escape_directions(&self, s: Site) -> Vec<Direction> {
        let mut out = Vec::with_capacity(4);
        if s.l == 0 {
            out.push(Direction::Left);
        }
        if s.l == self.width - 1 {
            out.push(Direction::Right);
        }
        if s.h == 0 {
            out.push(Direction::Down);
        }
        if s.h == self.height - 1 {
            out.push(Direction::Up);
        }
        out
    }

    /// Every boundary site exactly once: left column bottom-to-top, right
    /// column bottom-to-top, then the bottom and top rows without corners.
    pub fn boundary_sites(&self) -> Vec<Site> {
        let (w, hgt) = (self.width, self.height);
        let mut out = Vec::new();
        out.extend((0..hgt).map(|h| Site::new(0, h)));
        if w > 1 {
            out.extend((0..hgt).map(|h| Site::new(w - 1, h)));
        }
        if w > 2 {
            out.extend((1..w - 1).map(|l| Site::new(l, 0)));
            if hgt > 1 {
                out.extend((1..w - 1).map(|l| Site::new(l, hgt - 1)));
            }
        }
        out
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    /// Parses `WxH`, e.g. `31x31`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config("grid", format!("expected WxH with positive integers, got `{s}`"));
        let (w, h) = s.trim().split_once(['x', 'X']).ok_or_else(bad)?;
        let w: usize = w.trim().parse().map_err(|_| bad())?;
        let h: usize = h.trim().parse().map_err(|_| bad())?;
        GridSpec::new(w, h).map_err(|e| Error::config("grid", e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Left,
    Right,
    Up,
    Down,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Left => "left",
            Direction::Right => "right",
            Direction::Up => "up",
            Direction::Down => "down",
        })
    }
}

/// Hilbert-space construction.
///
/// `A` is the second-quantised occupation basis where every escape lands in
/// one shared vacuum. `B` tags each escape with the edge it crossed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    A,
    B,
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(Method::A),
            "b" => Ok(Method::B),
            other => Err(Error::config("method", format!("expected a or b, got `{other}`"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::A => "a",
            Method::B => "b",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Closed,
    Open,
}

impl FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "closed" => Ok(Boundary::Closed),
            "open" => Ok(Boundary::Open),
            other => Err(Error::config("boundary", format!("expected closed or open, got `{other}`"))),
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Closed => "closed",
            Boundary::Open => "open",
        })
    }
}

/// Occupation flags `(p, m←, m→, m↑, m↓)` of a basis state. Method A's
/// vacuum records an escape without a direction in `undirected`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Occupancy {
    pub p: u8,
    pub left: u8,
    pub right: u8,
    pub up: u8,
    pub down: u8,
    pub undirected: u8,
}

impl Occupancy {
    /// Always 1 for a valid single-photon state.
    pub fn total(&self) -> u8 {
        self.p + self.left + self.right + self.up + self.down + self.undirected
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisState {
    /// Photon sits in the cavity at `site`.
    InPlane { site: Site },
    /// Method A: the photon has left the lattice.
    Vacuum,
    /// Method B: the photon left through the `direction` edge of `site`.
    Escaped { site: Site, direction: Direction },
}

impl BasisState {
    pub fn occupancy(&self) -> Occupancy {
        let mut o = Occupancy { p: 0, left: 0, right: 0, up: 0, down: 0, undirected: 0 };
        match self {
            BasisState::InPlane { .. } => o.p = 1,
            BasisState::Vacuum => o.undirected = 1,
            BasisState::Escaped { direction, .. } => match direction {
                Direction::Left => o.left = 1,
                Direction::Right => o.right = 1,
                Direction::Up => o.up = 1,
                Direction::Down => o.down = 1,
            },
        }
        o
    }

    pub fn is_in_plane(&self) -> bool {
        matches!(self, BasisState::InPlane { .. })
    }
}

/// Ordered reduced basis for one (method, boundary) choice.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    grid: GridSpec,
    method: Method,
    boundary: Boundary,
    states: Vec<BasisState>,
    escaped_index: HashMap<(Site, Direction), usize>,
}

impl BasisSet {
    /// Builds the reduced basis. Dimensions:
    /// closed `L·H`; open A `L·H + 1`; open B `L·H + 2(L+H)`.
    pub fn enumerate(grid: GridSpec, method: Method, boundary: Boundary) -> Self {
        let mut states: Vec<BasisState> = grid.sites().map(|site| BasisState::InPlane { site }).collect();
        let mut escaped_index = HashMap::new();
        if boundary == Boundary::Open {
            match method {
                Method::A => states.push(BasisState::Vacuum),
                Method::B => {
                    for site in grid.boundary_sites() {
                        for direction in grid.escape_directions(site) {
                            escaped_index.insert((site, direction), states.len());
                            states.push(BasisState::Escaped { site, direction });
                        }
                    }
                }
            }
        }
        BasisSet { grid, method, boundary, states, escaped_index }
    }

    /// Table dimension for a (method, boundary) pair, computed in closed form.
    pub fn expected_dimension(grid: GridSpec, method: Method, boundary: Boundary) -> usize {
        let n = grid.site_count();
        match (method, boundary) {
            (_, Boundary::Closed) => n,
            (Method::A, Boundary::Open) => n + 1,
            (Method::B, Boundary::Open) => n + 2 * (grid.width() + grid.height()),
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn in_plane_dim(&self) -> usize {
        self.grid.site_count()
    }

    /// Number of vacuum/escaped states.
    pub fn outside_dim(&self) -> usize {
        self.dim() - self.in_plane_dim()
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn state(&self, ordinal: usize) -> Option<BasisState> {
        self.states.get(ordinal).copied()
    }

    pub fn site_ordinal(&self, s: Site) -> Result<usize> {
        self.grid.check(s)?;
        Ok(self.grid.ordinal(s))
    }

    pub fn vacuum_ordinal(&self) -> Option<usize> {
        match (self.method, self.boundary) {
            (Method::A, Boundary::Open) => Some(self.in_plane_dim()),
            _ => None,
        }
    }

    pub fn escaped_ordinal(&self, site: Site, direction: Direction) -> Option<usize> {
        self.escaped_index.get(&(site, direction)).copied()
    }

    pub fn index_of(&self, state: &BasisState) -> Option<usize> {
        match *state {
            BasisState::InPlane { site } => self.site_ordinal(site).ok(),
            BasisState::Vacuum => self.vacuum_ordinal(),
            BasisState::Escaped { site, direction } => self.escaped_ordinal(site, direction),
        }
    }

    pub fn descriptor(&self) -> BasisDescriptor {
        BasisDescriptor {
            method: self.method,
            boundary: self.boundary,
            width: self.grid.width(),
            height: self.grid.height(),
            dimension: self.dim(),
            states: self.states.clone(),
        }
    }
}

/// JSON-serialisable summary of a [`BasisSet`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisDescriptor {
    pub method: Method,
    pub boundary: Boundary,
    pub width: usize,
    pub height: usize,
    pub dimension: usize,
    pub states: Vec<BasisState>,
}

/// Full occupation space `⊗ |p_{l,h}⟩` with `p ∈ {0,1}`, at oracle scale.
///
/// A pattern is a bit mask whose bit `i` is the occupation of the site with
/// in-plane ordinal `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FullBasis {
    grid: GridSpec,
}

impl FullBasis {
    pub fn enumerate(grid: GridSpec) -> Result<Self> {
        let sites = grid.site_count();
        if sites > ORACLE_MAX_SITES {
            return Err(Error::OracleScale { sites, limit: ORACLE_MAX_SITES });
        }
        Ok(FullBasis { grid })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn dim(&self) -> usize {
        1usize << self.grid.site_count()
    }

    pub fn patterns(&self) -> std::ops::Range<u32> {
        0..self.dim() as u32
    }

    pub fn vacuum(&self) -> u32 {
        0
    }

    /// Single-excitation patterns ordered by site ordinal, so position `i`
    /// matches in-plane ordinal `i` of [`BasisSet::enumerate`].
    pub fn single_excitation(&self) -> Vec<u32> {
        (0..self.grid.site_count()).map(|i| 1u32 << i).collect()
    }
}
