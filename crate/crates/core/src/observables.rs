//! Quantities extracted from a state: per-site probabilities, column
//! marginals, escaped probability and symmetry diagnostics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{BasisSet, Boundary, GridSpec};
use crate::scalar::{abs, Real};

/// Probability per cavity, row-major with `h` outer.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteProbabilityField<T> {
    width: usize,
    height: usize,
    values: Vec<T>,
}

impl<T: Real> SiteProbabilityField<T> {
    pub fn new(grid: GridSpec, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.site_count() {
            return Err(Error::BasisMismatch { expected: grid.site_count(), found: values.len() });
        }
        Ok(SiteProbabilityField { width: grid.width(), height: grid.height(), values })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, l: usize, h: usize) -> T {
        self.values[h * self.width + l]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Row `h` of the field.
    pub fn row(&self, h: usize) -> &[T] {
        &self.values[h * self.width..(h + 1) * self.width]
    }

    pub fn total(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, &p| acc + p)
    }

    pub fn max(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, &p| if p > acc { p } else { acc })
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().reduce(|acc, p| if p < acc { p } else { acc }).unwrap_or_else(T::zero)
    }
}

/// `marginal[l] = Σ_h P(l, h)`.
pub fn column_marginal<T: Real>(field: &SiteProbabilityField<T>) -> Vec<T> {
    let mut out = vec![T::zero(); field.width];
    for h in 0..field.height {
        for (m, &p) in out.iter_mut().zip(field.row(h)) {
            *m += p;
        }
    }
    out
}

/// Largest deviation from the grid's mirror symmetries: left-right,
/// bottom-top, and the diagonal transpose when the grid is square.
pub fn symmetry_error<T: Real>(field: &SiteProbabilityField<T>) -> T {
    let (w, h) = (field.width, field.height);
    let mut worst = T::zero();
    let mut bump = |d: T| {
        if d > worst {
            worst = d;
        }
    };
    for hh in 0..h {
        for l in 0..w {
            let p = field.get(l, hh);
            bump(abs(p - field.get(w - 1 - l, hh)));
            bump(abs(p - field.get(l, h - 1 - hh)));
            if w == h {
                bump(abs(p - field.get(hh, l)));
            }
        }
    }
    worst
}

/// Total population outside the plane. Zero for a closed basis.
pub fn dissipative_probability<T: Real>(outside: &[T], basis: &BasisSet) -> T {
    if basis.boundary() == Boundary::Closed {
        return T::zero();
    }
    outside.iter().fold(T::zero(), |acc, &p| acc + p)
}

/// Everything recorded at one snapshot step.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<T> {
    pub step: usize,
    pub time: T,
    pub field: SiteProbabilityField<T>,
    pub column_marginal: Vec<T>,
    /// Vacuum/escape populations in basis order.
    pub outside: Vec<T>,
    pub dissipative_probability: T,
    pub in_plane_total: T,
    pub trace: T,
    pub max_site_probability: T,
}

/// One row of the sampled time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesPoint<T> {
    pub step: usize,
    pub time: T,
    pub trace: T,
    pub in_plane_total: T,
    pub dissipative_probability: T,
    pub max_site_probability: T,
    pub symmetry_error: T,
    pub purity: T,
}

/// Largest site probability over the snapshots after step 0. A trajectory
/// holding only the initial snapshot reports that snapshot.
pub fn global_max_probability<T: Real>(snapshots: &[Snapshot<T>]) -> Result<T> {
    if snapshots.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let later: Vec<&Snapshot<T>> = snapshots.iter().filter(|s| s.step > 0).collect();
    let pool: Vec<&Snapshot<T>> = if later.is_empty() { snapshots.iter().collect() } else { later };
    Ok(pool.iter().map(|s| s.max_site_probability).fold(T::zero(), |acc, p| if p > acc { p } else { acc }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(w: usize, h: usize, f: impl Fn(usize, usize) -> f64) -> SiteProbabilityField<f64> {
        let g = GridSpec::new(w, h).unwrap();
        let values = g.sites().map(|s| f(s.l, s.h)).collect();
        SiteProbabilityField::new(g, values).unwrap()
    }

    #[test]
    fn marginal_examples() {
        let delta = field(31, 31, |l, h| if (l, h) == (15, 15) { 1.0 } else { 0.0 });
        let m = column_marginal(&delta);
        assert_eq!(m.len(), 31);
        assert_eq!(m[15], 1.0);
        assert_eq!(m.iter().sum::<f64>(), 1.0);

        let uniform = field(31, 31, |_, _| 1.0 / 961.0);
        for v in column_marginal(&uniform) {
            assert!((v - 31.0 / 961.0).abs() < 1e-15);
        }

        let sym = field(31, 31, |l, h| {
            let (dl, dh) = (l as f64 - 15.0, h as f64 - 15.0);
            (-(dl * dl + 0.5 * dh * dh) / 9.0).exp()
        });
        let m = column_marginal(&sym);
        for l in 0..31 {
            assert!((m[l] - m[30 - l]).abs() < 1e-10);
        }
    }

    #[test]
    fn symmetry_metric() {
        let delta = field(31, 31, |l, h| if (l, h) == (15, 15) { 1.0 } else { 0.0 });
        assert_eq!(symmetry_error(&delta), 0.0);
        let off = field(5, 5, |l, h| if (l, h) == (0, 2) { 1.0 } else { 0.0 });
        assert!(symmetry_error(&off) > 0.1);
        // rectangles skip the transpose check
        let rect = field(4, 2, |_, _| 0.125);
        assert_eq!(symmetry_error(&rect), 0.0);
    }

    #[test]
    fn field_rejects_wrong_length() {
        let g = GridSpec::new(2, 2).unwrap();
        assert!(SiteProbabilityField::new(g, vec![0.0; 3]).is_err());
    }

    fn snap(step: usize, max: f64) -> Snapshot<f64> {
        let g = GridSpec::new(1, 1).unwrap();
        Snapshot {
            step,
            time: 0.0,
            field: SiteProbabilityField::new(g, vec![max]).unwrap(),
            column_marginal: vec![max],
            outside: vec![],
            dissipative_probability: 0.0,
            in_plane_total: max,
            trace: max,
            max_site_probability: max,
        }
    }

    #[test]
    fn global_max_skips_initial_state() {
        assert!(matches!(global_max_probability::<f64>(&[]), Err(Error::EmptyTrajectory)));
        assert_eq!(global_max_probability(&[snap(300, 0.02)]).unwrap(), 0.02);
        assert_eq!(global_max_probability(&[snap(0, 1.0), snap(300, 0.02), snap(500, 0.03)]).unwrap(), 0.03);
        assert_eq!(global_max_probability(&[snap(0, 1.0)]).unwrap(), 1.0);
    }

    #[test]
    fn closed_basis_has_no_dissipative_probability() {
        let g = GridSpec::new(3, 3).unwrap();
        let b = BasisSet::enumerate(g, crate::lattice::Method::A, Boundary::Closed);
        assert_eq!(dissipative_probability(&[0.3], &b), 0.0);
        let b = BasisSet::enumerate(g, crate::lattice::Method::B, Boundary::Open);
        assert_eq!(dissipative_probability(&[0.25, 0.5], &b), 0.75);
    }
}
