//! Block-form evolution in the lattice's product eigenbasis.
//!
//! In the mode frame the unitary step is an elementwise phase
//! `B̃_{αβ} ← p_α p̄_β B̃_{αβ}`. The boundary decay operator `K` is diagonal
//! on boundary sites only, so it splits into at most four line terms: the
//! left/right columns `M_y ⊗ u uᵀ` and the bottom/top rows (corners
//! excluded) `w wᵀ ⊗ M_x`, where `u`, `w` are eigenvector rows at the line
//! coordinate and `M = Vᵀ diag(k) V` along the line. Applying `K̃` then costs
//! `O(n²)` per line instead of a dense `O(n³)` product.
//!
//! The density block is stored column-major: entry `(α, β)` lives at
//! `β·n + α`.

use std::sync::Arc;

use crate::dissipation::JumpChannelSet;
use crate::error::{Error, Result};
use crate::evolution::propagator::SeparableSpectrum;
use crate::hamiltonian::PhysicalParams;
use crate::lattice::{GridSpec, Site};
use crate::scalar::{czero, lit, Complex, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    /// Fixed `l`; the line runs along `h`.
    Column(usize),
    /// Fixed `h`; the line runs along `l` (corners excluded).
    Row(usize),
}

#[derive(Debug, Clone)]
struct Line<T: Real> {
    axis: Axis,
    len: usize,
    /// Eigenvector row at the fixed coordinate.
    mode: Vec<T>,
    /// `Vᵀ diag(k) V` along the line, row-major.
    along: Vec<T>,
    /// Projection of B̃ onto `mode`, `len × n` row-major.
    proj: Vec<Complex<T>>,
    /// `along · proj`.
    mixed: Vec<Complex<T>>,
}

impl<T: Real> Line<T> {
    fn len(&self) -> usize {
        self.len
    }
}

/// Density block in the mode frame plus escape populations.
#[derive(Debug, Clone)]
pub struct SpectralBlock<T: Real> {
    spectrum: Arc<SeparableSpectrum<T>>,
    rho: Vec<Complex<T>>,
    escaped: Vec<T>,
    lines: Vec<Line<T>>,
    jumps: Vec<(usize, usize, T)>,
    boundary_pop: Vec<T>,
    scale: T,
    // scratch
    xcol: Vec<Complex<T>>,
    rrow: Vec<Complex<T>>,
}

impl<T: Real> SpectralBlock<T> {
    /// Starts from `|site⟩⟨site|`. `channels` must only damp boundary
    /// sites; interior decay weights are rejected.
    pub fn new(
        spectrum: Arc<SeparableSpectrum<T>>,
        grid: GridSpec,
        channels: &JumpChannelSet<T>,
        params: &PhysicalParams<T>,
        site: Site,
    ) -> Result<Self> {
        let n = spectrum.dim();
        if grid.site_count() != n || channels.in_plane_dim() != n {
            return Err(Error::BasisMismatch { expected: n, found: channels.in_plane_dim() });
        }
        let lines = build_lines(&spectrum, grid, &channels.decay_weights()[..n])?;
        let v = spectrum.site_vector(site.l, site.h);
        let mut rho = vec![czero(); n * n];
        for (beta, &vb) in v.iter().enumerate() {
            if vb == T::zero() {
                continue;
            }
            for (alpha, &va) in v.iter().enumerate() {
                rho[beta * n + alpha] = Complex::new(va * vb, T::zero());
            }
        }
        let jumps = channels.channels().iter().map(|c| (c.source, c.target - n, c.rate)).collect();
        Ok(SpectralBlock {
            rho,
            escaped: vec![T::zero(); channels.dim() - n],
            lines,
            jumps,
            boundary_pop: vec![T::zero(); n],
            scale: params.dt / params.hbar,
            xcol: vec![czero(); n],
            rrow: vec![czero(); n],
            spectrum,
        })
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    pub fn escaped(&self) -> &[T] {
        &self.escaped
    }

    /// Mode-frame block, column-major.
    pub fn mode_block(&self) -> &[Complex<T>] {
        &self.rho
    }

    /// One unitary step followed by one Euler dissipator step.
    pub fn step(&mut self) {
        let n = self.dim();
        let phases = self.spectrum.phases();
        let width = self.spectrum.width();
        let has_lines = !self.lines.is_empty();
        for beta in 0..n {
            let pb = phases[beta].conj();
            let col = &mut self.rho[beta * n..(beta + 1) * n];
            for (z, pa) in col.iter_mut().zip(phases) {
                *z *= *pa * pb;
            }
            if has_lines {
                for line in &mut self.lines {
                    project_column(line, col, width, n, beta);
                }
            }
        }
        if !has_lines {
            return;
        }
        self.boundary_populations();
        for line in &mut self.lines {
            let len = line.len();
            line.mixed.iter_mut().for_each(|z| *z = czero());
            for i in 0..len {
                let dst = &mut line.mixed[i * n..(i + 1) * n];
                for j in 0..len {
                    let m = line.along[i * len + j];
                    if m == T::zero() {
                        continue;
                    }
                    let src = &line.proj[j * n..(j + 1) * n];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += *s * m;
                    }
                }
            }
        }
        self.dissipate();
        for &(source, target, rate) in &self.jumps {
            self.escaped[target] += self.scale * rate * self.boundary_pop[source];
        }
    }

    /// `B̃ ← B̃ − (dt/2ħ)(K̃B̃ + B̃K̃)`, with `B̃K̃ = (K̃B̃)†`.
    fn dissipate(&mut self) {
        let n = self.dim();
        let width = self.spectrum.width();
        let height = self.spectrum.height();
        let half: T = self.scale * lit(0.5);
        for beta in 0..n {
            let (a_beta, b_beta) = (beta % width, beta / width);
            self.xcol.iter_mut().for_each(|z| *z = czero());
            self.rrow.iter_mut().for_each(|z| *z = czero());
            for line in &self.lines {
                match line.axis {
                    Axis::Column(_) => {
                        for b in 0..height {
                            let g = line.mixed[b * n + beta];
                            let dst = &mut self.xcol[b * width..(b + 1) * width];
                            for (d, &u) in dst.iter_mut().zip(&line.mode) {
                                *d += g * u;
                            }
                        }
                        let coef = line.mode[a_beta];
                        let src = &line.mixed[b_beta * n..(b_beta + 1) * n];
                        for (d, s) in self.rrow.iter_mut().zip(src) {
                            *d += *s * coef;
                        }
                    }
                    Axis::Row(_) => {
                        for (b, &w) in line.mode.iter().enumerate() {
                            let dst = &mut self.xcol[b * width..(b + 1) * width];
                            for (a, d) in dst.iter_mut().enumerate() {
                                *d += line.mixed[a * n + beta] * w;
                            }
                        }
                        let coef = line.mode[b_beta];
                        let src = &line.mixed[a_beta * n..(a_beta + 1) * n];
                        for (d, s) in self.rrow.iter_mut().zip(src) {
                            *d += *s * coef;
                        }
                    }
                }
            }
            let col = &mut self.rho[beta * n..(beta + 1) * n];
            for ((z, x), r) in col.iter_mut().zip(&self.xcol).zip(&self.rrow) {
                *z -= (*x + r.conj()) * half;
            }
        }
    }

    /// `⟨s|ρ̃|s⟩` for every boundary site, from the line projections.
    fn boundary_populations(&mut self) {
        let n = self.dim();
        let width = self.spectrum.width();
        let height = self.spectrum.height();
        let sp = &self.spectrum;
        for line in &self.lines {
            match line.axis {
                Axis::Column(l) => {
                    // G[b][b'] = Σ_a' Z[b][(b',a')] u[a']
                    let mut g = vec![czero::<T>(); height * height];
                    for b in 0..height {
                        for bp in 0..height {
                            let seg = &line.proj[b * n + bp * width..b * n + (bp + 1) * width];
                            g[b * height + bp] = dot_real(seg, &line.mode);
                        }
                    }
                    for h in 0..height {
                        let vy = sp.vy_row(h);
                        self.boundary_pop[h * width + l] = quad_form(&g, vy);
                    }
                }
                Axis::Row(h) => {
                    // G[a][a'] = Σ_b' Z[a][(b',a')] w[b']
                    let mut g = vec![czero::<T>(); width * width];
                    for a in 0..width {
                        let row = &line.proj[a * n..(a + 1) * n];
                        for (bp, &w) in line.mode.iter().enumerate() {
                            let seg = &row[bp * width..(bp + 1) * width];
                            let dst = &mut g[a * width..(a + 1) * width];
                            for (d, s) in dst.iter_mut().zip(seg) {
                                *d += *s * w;
                            }
                        }
                    }
                    for l in 1..width.saturating_sub(1) {
                        let vx = sp.vx_row(l);
                        self.boundary_pop[h * width + l] = quad_form(&g, vx);
                    }
                }
            }
        }
    }

    pub fn in_plane_trace(&self) -> T {
        let n = self.dim();
        (0..n).fold(T::zero(), |acc, i| acc + self.rho[i * n + i].re)
    }

    pub fn trace(&self) -> T {
        self.escaped.iter().fold(self.in_plane_trace(), |acc, &x| acc + x)
    }

    pub fn purity(&self) -> T {
        let inner = self.rho.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
        self.escaped.iter().fold(inner, |acc, &x| acc + x * x)
    }

    /// Site-basis diagonal `diag((V_y⊗V_x) B̃ (V_y⊗V_x)ᵀ)`, in site ordinal
    /// order. Only `Re B̃` contributes since the eigenvectors are real.
    pub fn site_populations(&self) -> Vec<T> {
        let sp = &self.spectrum;
        let (w, h) = (sp.width(), sp.height());
        let n = w * h;
        // t[(b·h + b')·w + l] = Σ_{a,a'} V_x[l][a] Re B̃[(b,a),(b',a')] V_x[l][a']
        let mut t = vec![T::zero(); h * h * w];
        let mut y = vec![T::zero(); h * w];
        for beta in 0..n {
            let (ap, bp) = (beta % w, beta / w);
            let col = &self.rho[beta * n..(beta + 1) * n];
            for b in 0..h {
                let seg = &col[b * w..(b + 1) * w];
                for l in 0..w {
                    let vx = sp.vx_row(l);
                    let mut acc = T::zero();
                    for (z, &v) in seg.iter().zip(vx) {
                        acc += z.re * v;
                    }
                    y[b * w + l] = acc;
                }
            }
            for b in 0..h {
                let dst = &mut t[(b * h + bp) * w..(b * h + bp + 1) * w];
                for (l, d) in dst.iter_mut().enumerate() {
                    *d += y[b * w + l] * sp.vx(l, ap);
                }
            }
        }
        let mut out = vec![T::zero(); n];
        for hh in 0..h {
            let vy = sp.vy_row(hh);
            for (b, &vb) in vy.iter().enumerate() {
                for (bp, &vbp) in vy.iter().enumerate() {
                    let c = vb * vbp;
                    let src = &t[(b * h + bp) * w..(b * h + bp + 1) * w];
                    let dst = &mut out[hh * w..(hh + 1) * w];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += *s * c;
                    }
                }
            }
        }
        out
    }
}

/// Closed-system pure state in the mode frame.
#[derive(Debug, Clone)]
pub struct SpectralPure<T: Real> {
    spectrum: Arc<SeparableSpectrum<T>>,
    modes: Vec<Complex<T>>,
}

impl<T: Real> SpectralPure<T> {
    pub fn new(spectrum: Arc<SeparableSpectrum<T>>, site: Site) -> Self {
        let modes = spectrum.site_vector(site.l, site.h).into_iter().map(|v| Complex::new(v, T::zero())).collect();
        SpectralPure { spectrum, modes }
    }

    pub fn step(&mut self) {
        for (m, p) in self.modes.iter_mut().zip(self.spectrum.phases()) {
            *m *= *p;
        }
    }

    pub fn norm_sqr(&self) -> T {
        self.modes.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    pub fn site_amplitudes(&self) -> Vec<Complex<T>> {
        self.spectrum.to_sites(&self.modes)
    }
}

fn project_column<T: Real>(line: &mut Line<T>, col: &[Complex<T>], width: usize, n: usize, beta: usize) {
    match line.axis {
        Axis::Column(_) => {
            for (b, seg) in col.chunks_exact(width).enumerate() {
                line.proj[b * n + beta] = dot_real(seg, &line.mode);
            }
        }
        Axis::Row(_) => {
            let mut acc = [czero::<T>(); 64];
            if width <= acc.len() {
                let acc = &mut acc[..width];
                for (seg, &w) in col.chunks_exact(width).zip(&line.mode) {
                    for (d, s) in acc.iter_mut().zip(seg) {
                        *d += *s * w;
                    }
                }
                for (a, v) in acc.iter().enumerate() {
                    line.proj[a * n + beta] = *v;
                }
            } else {
                for a in 0..width {
                    let mut v = czero();
                    for (seg, &w) in col.chunks_exact(width).zip(&line.mode) {
                        v += seg[a] * w;
                    }
                    line.proj[a * n + beta] = v;
                }
            }
        }
    }
}

#[inline]
fn dot_real<T: Real>(z: &[Complex<T>], v: &[T]) -> Complex<T> {
    let (mut re, mut im) = (T::zero(), T::zero());
    for (a, &b) in z.iter().zip(v) {
        re += a.re * b;
        im += a.im * b;
    }
    Complex::new(re, im)
}

/// `Re(vᵀ G v)` for square row-major `G`.
fn quad_form<T: Real>(g: &[Complex<T>], v: &[T]) -> T {
    let m = v.len();
    let mut acc = T::zero();
    for (i, &vi) in v.iter().enumerate() {
        let mut row = T::zero();
        for (j, &vj) in v.iter().enumerate() {
            row += g[i * m + j].re * vj;
        }
        acc += vi * row;
    }
    acc
}

fn build_lines<T: Real>(sp: &SeparableSpectrum<T>, grid: GridSpec, decay: &[T]) -> Result<Vec<Line<T>>> {
    let (w, h) = (grid.width(), grid.height());
    let n = w * h;
    let k = |l: usize, hh: usize| decay[hh * w + l];
    for hh in 1..h.saturating_sub(1) {
        for l in 1..w.saturating_sub(1) {
            if k(l, hh) != T::zero() {
                return Err(Error::Unsupported(format!(
                    "mode-frame kernel handles boundary decay only; interior site ({l},{hh}) is damped"
                )));
            }
        }
    }
    let mut lines = Vec::new();
    let mut columns = vec![0];
    if w > 1 {
        columns.push(w - 1);
    }
    for l in columns {
        let d: Vec<T> = (0..h).map(|hh| k(l, hh)).collect();
        if d.iter().all(|&x| x == T::zero()) {
            continue;
        }
        lines.push(Line {
            axis: Axis::Column(l),
            len: h,
            mode: sp.vx_row(l).to_vec(),
            along: along_operator(&d, |i, j| sp.vy(i, j)),
            proj: vec![czero(); h * n],
            mixed: vec![czero(); h * n],
        });
    }
    let mut rows = vec![0];
    if h > 1 {
        rows.push(h - 1);
    }
    for hh in rows {
        let d: Vec<T> = (0..w).map(|l| if l == 0 || l == w - 1 { T::zero() } else { k(l, hh) }).collect();
        if d.iter().all(|&x| x == T::zero()) {
            continue;
        }
        lines.push(Line {
            axis: Axis::Row(hh),
            len: w,
            mode: sp.vy_row(hh).to_vec(),
            along: along_operator(&d, |i, j| sp.vx(i, j)),
            proj: vec![czero(); w * n],
            mixed: vec![czero(); w * n],
        });
    }
    Ok(lines)
}

/// `M[i][j] = Σ_s V[s][i] d[s] V[s][j]`.
fn along_operator<T: Real>(d: &[T], v: impl Fn(usize, usize) -> T) -> Vec<T> {
    let m = d.len();
    let mut out = vec![T::zero(); m * m];
    for (s, &ds) in d.iter().enumerate() {
        if ds == T::zero() {
            continue;
        }
        for i in 0..m {
            let vi = v(s, i) * ds;
            for j in 0..m {
                out[i * m + j] += vi * v(s, j);
            }
        }
    }
    out
}
