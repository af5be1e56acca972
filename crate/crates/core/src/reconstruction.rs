//! Monopole and dipole index functions over a sampling lattice.
//!
//! [`IndexPlan`] caches everything that depends only on the grid and the
//! background (eigenfunction values and gradients, denominator quadratic
//! forms), so many traces can be indexed against one grid cheaply.

use crate::boundary::{default_max_mode, dft, mode_weight, sobolev_pair, BoundaryTrace, FourierCoeffs};
use crate::error::{DsmError, Result};
use crate::kernels::{lattice, KernelParams};
use crate::probing::{
    probe_coeffs, BackgroundMedium, Direction, Eigenvalues, PointModes, ProbeKind, ProbePoint,
};
use crate::special::MAX_ORDER;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

/// Square lattice of sampling points clipped to a disk.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingGrid {
    pub points: Vec<ProbePoint>,
    /// Lattice column and row of each point (row 0 is the lowest `y`).
    pub cells: Vec<(usize, usize)>,
    pub spacing: f64,
    pub max_radius: f64,
    /// Lattice width and height.
    pub side: usize,
}

impl SamplingGrid {
    pub fn new(spacing: f64, max_radius: f64) -> Result<Self> {
        if !(spacing > 0.0 && max_radius > 0.0 && spacing <= max_radius) {
            return Err(DsmError::config(
                "grid",
                format!("need 0 < spacing <= max_radius, got {spacing}, {max_radius}"),
            ));
        }
        let raw = lattice(spacing, max_radius);
        let half = (max_radius / spacing + 1e-9).floor() as usize;
        Ok(SamplingGrid {
            points: raw.iter().map(|&(_, _, x, y)| ProbePoint::cartesian(x, y)).collect(),
            cells: raw.iter().map(|&(i, j, _, _)| (i, j)).collect(),
            spacing,
            max_radius,
            side: 2 * half + 1,
        })
    }

    /// Spacing 0.02 R clipped to 0.95 R.
    pub fn default_for(bg: &BackgroundMedium) -> Self {
        Self::new(0.02 * bg.radius, 0.95 * bg.radius).expect("valid default grid")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn check(&self, bg: &BackgroundMedium) -> Result<()> {
        if !(self.max_radius < bg.radius) {
            return Err(DsmError::config("grid.max_radius", "must be smaller than the disk radius"));
        }
        Ok(())
    }

    /// Point index per lattice cell, row-major from the lowest row.
    fn cell_map(&self) -> Vec<Option<usize>> {
        let mut map = vec![None; self.side * self.side];
        for (k, &(i, j)) in self.cells.iter().enumerate() {
            map[j * self.side + i] = Some(k);
        }
        map
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexKind {
    Monopole,
    Dipole,
}

#[derive(Clone, Debug)]
pub struct IndexField {
    pub grid: SamplingGrid,
    pub kind: IndexKind,
    pub raw: Vec<f64>,
    /// `(raw / max raw)^2`.
    pub normalized_sq: Vec<f64>,
    pub directions: Option<Vec<Direction>>,
    /// Points where the direction fell back to radial.
    pub degenerate: Option<Vec<bool>>,
}

fn normalize(raw: &[f64]) -> Vec<f64> {
    let max = raw.iter().cloned().fold(0.0, f64::max);
    if max > 0.0 {
        raw.iter().map(|v| (v / max).powi(2)).collect()
    } else {
        vec![0.0; raw.len()]
    }
}

impl IndexField {
    fn new(grid: &SamplingGrid, kind: IndexKind, raw: Vec<f64>) -> Self {
        IndexField {
            grid: grid.clone(),
            kind,
            normalized_sq: normalize(&raw),
            raw,
            directions: None,
            degenerate: None,
        }
    }

    /// Index of the largest value, lowest index on ties.
    pub fn argmax_index(&self) -> usize {
        let mut best = 0;
        for (k, v) in self.normalized_sq.iter().enumerate() {
            if *v > self.normalized_sq[best] {
                best = k;
            }
        }
        best
    }

    pub fn argmax(&self) -> ProbePoint {
        self.grid.points[self.argmax_index()]
    }

    /// `max / mean` of the normalized field.
    pub fn peak_to_mean(&self) -> f64 {
        let mean = self.normalized_sq.iter().sum::<f64>() / self.normalized_sq.len() as f64;
        self.normalized_sq.iter().cloned().fold(0.0, f64::max) / mean
    }

    /// Points above all existing 8 lattice neighbours with normalized value
    /// at least `threshold`, strongest first.
    pub fn local_maxima(&self, threshold: f64) -> Vec<(ProbePoint, f64)> {
        let map = self.grid.cell_map();
        let side = self.grid.side as i64;
        let v = &self.normalized_sq;
        let mut out: Vec<(usize, f64)> = Vec::new();
        for (k, &(i, j)) in self.grid.cells.iter().enumerate() {
            if v[k] < threshold {
                continue;
            }
            let mut peak = true;
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || ni < 0 || nj < 0 || ni >= side || nj >= side {
                        continue;
                    }
                    if let Some(n) = map[(nj * side + ni) as usize] {
                        if v[n] >= v[k] {
                            peak = false;
                        }
                    }
                }
            }
            if peak {
                out.push((k, v[k]));
            }
        }
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        out.into_iter().map(|(k, v)| (self.grid.points[k], v)).collect()
    }

    /// `x,y,value` rows of the normalized field.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,y,value")?;
        for (p, v) in self.grid.points.iter().zip(&self.normalized_sq) {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", p.x(), p.y(), v)?;
        }
        Ok(())
    }

    pub fn write_csv_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Binary 8-bit PGM over the lattice bounding box, top row at the
    /// largest `y`; cells outside the disk are 0.
    pub fn write_pgm<W: Write>(&self, mut w: W) -> Result<()> {
        let side = self.grid.side;
        let mut pixels = vec![0u8; side * side];
        for (&(i, j), v) in self.grid.cells.iter().zip(&self.normalized_sq) {
            pixels[(side - 1 - j) * side + i] = (255.0 * v.clamp(0.0, 1.0)).round() as u8;
        }
        write!(w, "P5\n{side} {side}\n255\n")?;
        w.write_all(&pixels)?;
        Ok(())
    }

    pub fn write_pgm_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_pgm(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// `x,y,alpha,dx,dy,degenerate` rows; an error for monopole fields.
    pub fn write_directions_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let (Some(dirs), Some(flags)) = (&self.directions, &self.degenerate) else {
            return Err(DsmError::Layout("field carries no directions".into()));
        };
        writeln!(w, "x,y,alpha,dx,dy,degenerate")?;
        for ((p, d), f) in self.grid.points.iter().zip(dirs).zip(flags) {
            let [dx, dy] = d.vector();
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                p.x(),
                p.y(),
                d.alpha,
                dx,
                dy,
                u8::from(*f)
            )?;
        }
        Ok(())
    }
}

/// `phi(x)` and `grad phi(x)` at every grid point.
#[derive(Clone, Debug)]
pub struct AuxField {
    pub phi: Vec<Complex64>,
    pub grad_phi: Vec<[Complex64; 2]>,
}

/// Per-point cache of an [`IndexPlan`].
#[derive(Clone, Debug)]
struct PointCache {
    /// `|n|^{2 gamma} phi_n(x) / (2 pi)`, index `n + max_mode`.
    phi: Vec<Complex64>,
    grad: Vec<[Complex64; 2]>,
    /// `|zeta_x|^{n1} |G_x|^{n2}` at the clamped point.
    mono_den: f64,
    /// `|eta_{x,d}|^2 = d^T a d` and `|d . grad G_x|^2 = d^T b d`.
    dipole_forms: [[[f64; 2]; 2]; 2],
}

/// Quadratic forms `sum_n w_n (Re g Re g^T + Im g Im g^T) / (2 pi R)` with
/// `g = grad phi_n` and `g = lambda_n grad phi_n`.
fn dipole_forms(modes: &PointModes, eig: &Eigenvalues, gamma: f64, radius: f64) -> [[[f64; 2]; 2]; 2] {
    let mut q = [[[0.0; 2]; 2]; 2];
    let nmax = modes.nmax().min(eig.nmax()) as i64;
    let mut largest = 0.0f64;
    for n in 0..=nmax {
        let w = mode_weight(n, gamma);
        if w == 0.0 {
            continue;
        }
        let mut size = 0.0;
        for m in if n == 0 { vec![0] } else { vec![n, -n] } {
            let g = modes.grad(m);
            let lam = eig.green_factor(m.unsigned_abs() as usize);
            for (f, scale) in q.iter_mut().zip([1.0, lam * lam]) {
                for part in [[g[0].re, g[1].re], [g[0].im, g[1].im]] {
                    for a in 0..2 {
                        for b in 0..2 {
                            f[a][b] += w * scale * part[a] * part[b];
                        }
                    }
                    size += w * scale * (part[0] * part[0] + part[1] * part[1]);
                }
            }
        }
        largest = largest.max(size);
        if n >= 2 && size <= 1e-17 * largest {
            break;
        }
    }
    for f in q.iter_mut() {
        for row in f.iter_mut() {
            for v in row.iter_mut() {
                *v /= 2.0 * PI * radius;
            }
        }
    }
    q
}

fn quad(q: &[[f64; 2]; 2], d: Direction) -> f64 {
    let v = d.vector();
    (q[0][0] * v[0] * v[0] + 2.0 * q[0][1] * v[0] * v[1] + q[1][1] * v[1] * v[1]).max(0.0)
}

/// Grid- and background-dependent data shared by all traces.
pub struct IndexPlan {
    pub grid: SamplingGrid,
    pub bg: BackgroundMedium,
    pub params: KernelParams,
    pub max_mode: usize,
    cache: Vec<PointCache>,
}

impl IndexPlan {
    /// Plan for traces resolved up to `max_mode`.
    pub fn new(grid: &SamplingGrid, p: &KernelParams, bg: &BackgroundMedium, max_mode: usize) -> Result<Self> {
        p.validate()?;
        grid.check(bg)?;
        if max_mode > MAX_ORDER {
            return Err(DsmError::OrderTooLarge { order: max_mode, max: MAX_ORDER });
        }
        let eig = Eigenvalues::new(bg, MAX_ORDER)?;
        let cache = grid
            .points
            .par_iter()
            .map(|&x| -> Result<PointCache> {
                let modes = PointModes::new(x, bg, MAX_ORDER)?;
                let m = max_mode as i64;
                let scale = |n: i64| mode_weight(n, p.gamma) / (2.0 * PI);
                let phi = (-m..=m).map(|n| modes.phi(n) * scale(n)).collect();
                let grad = (-m..=m)
                    .map(|n| modes.grad(n).map(|g| g * scale(n)))
                    .collect();
                let mono_den = {
                    let clamped;
                    let at = if x.r < p.clamp_eta {
                        clamped = PointModes::new(ProbePoint::polar(p.clamp_eta, x.theta), bg, MAX_ORDER)?;
                        &clamped
                    } else {
                        &modes
                    };
                    let (z, _) = at.seminorm(ProbeKind::Monopole, None, &eig, p.gamma, bg.radius);
                    let (g, _) = at.seminorm(ProbeKind::Green, None, &eig, p.gamma, bg.radius);
                    z.powf(p.n1) * g.powf(p.n2)
                };
                Ok(PointCache {
                    phi,
                    grad,
                    mono_den,
                    dipole_forms: dipole_forms(&modes, &eig, p.gamma, bg.radius),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(IndexPlan {
            grid: grid.clone(),
            bg: *bg,
            params: *p,
            max_mode,
            cache,
        })
    }

    /// Plan sized for traces of `samples` probes.
    pub fn for_samples(grid: &SamplingGrid, p: &KernelParams, bg: &BackgroundMedium, samples: usize) -> Result<Self> {
        Self::new(grid, p, bg, default_max_mode(samples))
    }

    fn spectrum(&self, trace: &BoundaryTrace) -> Result<FourierCoeffs> {
        if (trace.radius() - self.bg.radius).abs() > 1e-12 * self.bg.radius {
            return Err(DsmError::RadiusMismatch {
                left: trace.radius(),
                right: self.bg.radius,
            });
        }
        let c = dft(trace, self.max_mode)?;
        if c.iter().all(|(_, v)| v == Complex64::new(0.0, 0.0)) {
            log::warn!("all-zero trace: index fields are identically zero");
        }
        Ok(c)
    }

    /// `phi(x) = <zeta_x, u>` and `grad phi(x)` from the data spectrum.
    pub fn aux_field(&self, trace: &BoundaryTrace) -> Result<AuxField> {
        let u = self.spectrum(trace)?;
        Ok(self.aux_from_spectrum(&u))
    }

    fn aux_from_spectrum(&self, u: &FourierCoeffs) -> AuxField {
        let m = self.max_mode as i64;
        let coeffs: Vec<Complex64> = (-m..=m).map(|n| u.get(n)).collect();
        let (phi, grad_phi) = self
            .cache
            .par_iter()
            .map(|c| {
                let mut phi = Complex64::new(0.0, 0.0);
                let mut grad = [Complex64::new(0.0, 0.0); 2];
                for (k, u) in coeffs.iter().enumerate() {
                    phi += c.phi[k] * u;
                    grad[0] += c.grad[k][0] * u;
                    grad[1] += c.grad[k][1] * u;
                }
                (phi, grad)
            })
            .unzip();
        AuxField { phi, grad_phi }
    }

    pub fn index_mo(&self, trace: &BoundaryTrace) -> Result<IndexField> {
        let aux = self.aux_field(trace)?;
        Ok(self.index_mo_from_aux(&aux))
    }

    pub fn index_mo_from_aux(&self, aux: &AuxField) -> IndexField {
        let raw = aux
            .phi
            .iter()
            .zip(&self.cache)
            .map(|(phi, c)| phi.norm() / c.mono_den)
            .collect();
        IndexField::new(&self.grid, IndexKind::Monopole, raw)
    }

    /// Dipole index; `directions` default to the optimal ones.
    pub fn index_di(&self, trace: &BoundaryTrace, directions: Option<&[Direction]>) -> Result<IndexField> {
        let aux = self.aux_field(trace)?;
        let (dirs, flags) = match directions {
            Some(d) if d.len() != self.grid.len() => {
                return Err(DsmError::Layout(format!(
                    "{} directions for {} grid points",
                    d.len(),
                    self.grid.len()
                )));
            }
            Some(d) => (d.to_vec(), vec![false; d.len()]),
            None => optimal_directions(&aux, &self.grid),
        };
        let p = &self.params;
        let raw = aux
            .grad_phi
            .iter()
            .zip(&self.cache)
            .zip(&dirs)
            .map(|((g, c), d)| {
                let num = d.dot(*g).norm();
                if num == 0.0 {
                    return 0.0;
                }
                let a = quad(&c.dipole_forms[0], *d).sqrt();
                let b = quad(&c.dipole_forms[1], *d).sqrt();
                num / (a.powf(p.m1) * b.powf(p.m2))
            })
            .collect();
        let mut field = IndexField::new(&self.grid, IndexKind::Dipole, raw);
        field.directions = Some(dirs);
        field.degenerate = Some(flags);
        Ok(field)
    }
}

/// Direction maximizing `|d . grad phi(x)|` at each point, with a radial
/// fallback (flagged) where `|grad phi|` is below `1e-12` of its grid max.
pub fn optimal_directions(aux: &AuxField, grid: &SamplingGrid) -> (Vec<Direction>, Vec<bool>) {
    let size = |g: &[Complex64; 2]| (g[0].norm_sqr() + g[1].norm_sqr()).sqrt();
    let max = aux.grad_phi.iter().map(size).fold(0.0, f64::max);
    aux.grad_phi
        .iter()
        .zip(&grid.points)
        .map(|(g, x)| {
            let radial = || Direction::from_vector([x.theta.cos(), x.theta.sin()]).expect("unit vector");
            if !(size(g) > 1e-12 * max) {
                return (radial(), true);
            }
            match Direction::maximizing(*g) {
                Some(d) => (d, false),
                None => (radial(), true),
            }
        })
        .unzip()
}

pub fn aux_field(trace: &BoundaryTrace, grid: &SamplingGrid, gamma: f64, bg: &BackgroundMedium) -> Result<AuxField> {
    let p = KernelParams { gamma, ..Default::default() };
    IndexPlan::for_samples(grid, &p, bg, trace.len())?.aux_field(trace)
}

pub fn index_mo(trace: &BoundaryTrace, grid: &SamplingGrid, p: &KernelParams, bg: &BackgroundMedium) -> Result<IndexField> {
    IndexPlan::for_samples(grid, p, bg, trace.len())?.index_mo(trace)
}

pub fn index_di(
    trace: &BoundaryTrace,
    grid: &SamplingGrid,
    p: &KernelParams,
    bg: &BackgroundMedium,
    directions: Option<&[Direction]>,
) -> Result<IndexField> {
    IndexPlan::for_samples(grid, p, bg, trace.len())?.index_di(trace, directions)
}

/// Monopole index from explicit probe spectra and the Sobolev pairing,
/// without the auxiliary field. Slow; kept as a cross-check.
pub fn index_mo_direct(
    trace: &BoundaryTrace,
    grid: &SamplingGrid,
    p: &KernelParams,
    bg: &BackgroundMedium,
) -> Result<IndexField> {
    p.validate()?;
    grid.check(bg)?;
    let max_mode = default_max_mode(trace.len());
    let u = dft(trace, max_mode)?;
    let ctx = crate::kernels::KernelContext::new(bg, p)?;
    let raw = grid
        .points
        .par_iter()
        .map(|&x| -> Result<f64> {
            let probe = probe_coeffs(ProbeKind::Monopole, x, None, bg, max_mode)?;
            let num = sobolev_pair(&probe.coeffs, &u, p.sobolev())?.norm();
            Ok(num / ctx.denominator(ProbeKind::Monopole, x, None)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IndexField::new(grid, IndexKind::Monopole, raw))
}

/// Two-measurement reconstruction: the monopole index from the
/// low-frequency trace, the dipole index with optimal directions from the
/// high-frequency trace.
pub fn reconstruct(
    low: &BoundaryTrace,
    high: &BoundaryTrace,
    grid: &SamplingGrid,
    p: &KernelParams,
    bg: &BackgroundMedium,
) -> Result<(IndexField, IndexField)> {
    low.check_layout(high)?;
    let plan = IndexPlan::for_samples(grid, p, bg, low.len())?;
    Ok((plan.index_mo(low)?, plan.index_di(high, None)?))
}
