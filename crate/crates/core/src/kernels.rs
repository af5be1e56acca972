//! The four sampling kernels, their static closed forms, argmax scans and
//! the spherical `K1`.
//!
//! A kernel pairs a probe at the sampling point `x` with a Green-type trace
//! sourced at `z` and divides by probe and Green seminorms at `x`:
//!
//! | kernel | probe at `x`         | source trace at `z` |
//! |--------|----------------------|---------------------|
//! | K1     | monopole             | `G_z`               |
//! | K2     | monopole             | `d_z . grad G_z`    |
//! | K3     | dipole `d_x`         | `G_z`               |
//! | K4     | dipole `d_x`         | `d_z . grad G_z`    |

use crate::boundary::{sobolev_pair, FourierCoeffs, SobolevParams};
use crate::error::{DsmError, Result};
use crate::probing::{
    spectrum_from_modes, BackgroundMedium, Direction, Eigenvalues, PointModes, ProbeKind, ProbePoint,
};
use crate::special::{bessel_i_half_order_ratios, bessel_i_half_ratios, legendre_p, MAX_ORDER};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Exponents, Sobolev scale and origin clamp of the index denominators.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelParams {
    pub gamma: f64,
    pub n1: f64,
    pub n2: f64,
    pub m1: f64,
    pub m2: f64,
    pub clamp_eta: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams {
            gamma: 1.0,
            n1: 0.5,
            n2: 0.5,
            m1: 0.5,
            m2: 0.5,
            clamp_eta: 0.1,
        }
    }
}

impl KernelParams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("params.gamma", self.gamma),
            ("params.n1", self.n1),
            ("params.n2", self.n2),
            ("params.m1", self.m1),
            ("params.m2", self.m2),
            ("params.clamp_eta", self.clamp_eta),
        ];
        for (path, v) in checks {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(DsmError::config(path, format!("{v} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    pub fn sobolev(&self) -> SobolevParams {
        SobolevParams { gamma: self.gamma }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    K1,
    K2,
    K3,
    K4,
}

impl Kernel {
    pub fn probe_kind(self) -> ProbeKind {
        match self {
            Kernel::K1 | Kernel::K2 => ProbeKind::Monopole,
            Kernel::K3 | Kernel::K4 => ProbeKind::Dipole,
        }
    }

    pub fn source_kind(self) -> ProbeKind {
        match self {
            Kernel::K1 | Kernel::K3 => ProbeKind::Green,
            Kernel::K2 | Kernel::K4 => ProbeKind::GradGreen,
        }
    }
}

/// Sampling point `x`, source `z` and their optional directions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelQuery {
    pub x: ProbePoint,
    pub z: ProbePoint,
    pub dx: Option<Direction>,
    pub dz: Option<Direction>,
}

/// Shared state for many kernel evaluations on one background.
pub struct KernelContext {
    pub bg: BackgroundMedium,
    pub params: KernelParams,
    eig: Eigenvalues,
}

impl KernelContext {
    pub fn new(bg: &BackgroundMedium, params: &KernelParams) -> Result<Self> {
        params.validate()?;
        Ok(KernelContext {
            bg: *bg,
            params: *params,
            eig: Eigenvalues::new(bg, MAX_ORDER)?,
        })
    }

    /// Coefficients of the source trace of `kernel` at `z`.
    pub fn source(&self, kernel: Kernel, z: ProbePoint, dz: Option<Direction>) -> Result<FourierCoeffs> {
        let kind = kernel.source_kind();
        if kind.needs_direction() && dz.is_none() {
            return Err(DsmError::domain("kernel", format!("{kernel:?} needs d_z")));
        }
        let modes = PointModes::new(z, &self.bg, MAX_ORDER)?;
        Ok(spectrum_from_modes(kind, &modes, dz, &self.eig, &self.bg, MAX_ORDER).coeffs)
    }

    /// Seminorm product in the denominator of the probe kind at `x`, with
    /// the origin clamp applied to the monopole family.
    pub fn denominator(&self, kind: ProbeKind, x: ProbePoint, dx: Option<Direction>) -> Result<f64> {
        let p = &self.params;
        let (probe, green, e1, e2) = match kind {
            ProbeKind::Monopole | ProbeKind::Green => (ProbeKind::Monopole, ProbeKind::Green, p.n1, p.n2),
            ProbeKind::Dipole | ProbeKind::GradGreen => (ProbeKind::Dipole, ProbeKind::GradGreen, p.m1, p.m2),
        };
        let at = if probe == ProbeKind::Monopole && x.r < p.clamp_eta {
            ProbePoint::polar(p.clamp_eta, x.theta)
        } else {
            x
        };
        let modes = PointModes::new(at, &self.bg, MAX_ORDER)?;
        let (a, _) = modes.seminorm(probe, dx, &self.eig, p.gamma, self.bg.radius);
        let (b, _) = modes.seminorm(green, dx, &self.eig, p.gamma, self.bg.radius);
        Ok(a.powf(e1) * b.powf(e2))
    }

    /// Complex numerator `<probe_x, source>`.
    pub fn numerator_with(
        &self,
        kernel: Kernel,
        x: ProbePoint,
        dx: Option<Direction>,
        source: &FourierCoeffs,
    ) -> Result<Complex64> {
        let kind = kernel.probe_kind();
        if kind.needs_direction() && dx.is_none() {
            return Err(DsmError::domain("kernel", format!("{kernel:?} needs d_x")));
        }
        let modes = PointModes::new(x, &self.bg, MAX_ORDER)?;
        let probe = spectrum_from_modes(kind, &modes, dx, &self.eig, &self.bg, MAX_ORDER);
        sobolev_pair(&probe.coeffs, source, self.params.sobolev())
    }

    /// `|numerator| / denominator` against a precomputed source trace.
    pub fn eval_with(
        &self,
        kernel: Kernel,
        x: ProbePoint,
        dx: Option<Direction>,
        source: &FourierCoeffs,
    ) -> Result<f64> {
        let num = self.numerator_with(kernel, x, dx, source)?;
        let den = self.denominator(kernel.probe_kind(), x, dx)?;
        Ok(num.norm() / den)
    }

    pub fn eval(&self, kernel: Kernel, q: &KernelQuery) -> Result<f64> {
        let src = self.source(kernel, q.z, q.dz)?;
        self.eval_with(kernel, q.x, q.dx, &src)
    }

    pub fn numerator(&self, kernel: Kernel, q: &KernelQuery) -> Result<Complex64> {
        let src = self.source(kernel, q.z, q.dz)?;
        self.numerator_with(kernel, q.x, q.dx, &src)
    }
}

pub fn kernel(kernel: Kernel, q: &KernelQuery, p: &KernelParams, bg: &BackgroundMedium) -> Result<f64> {
    KernelContext::new(bg, p)?.eval(kernel, q)
}

pub fn k1(q: &KernelQuery, p: &KernelParams, bg: &BackgroundMedium) -> Result<f64> {
    kernel(Kernel::K1, q, p, bg)
}

pub fn k2(q: &KernelQuery, p: &KernelParams, bg: &BackgroundMedium) -> Result<f64> {
    kernel(Kernel::K2, q, p, bg)
}

pub fn k3(q: &KernelQuery, p: &KernelParams, bg: &BackgroundMedium) -> Result<f64> {
    kernel(Kernel::K3, q, p, bg)
}

pub fn k4(q: &KernelQuery, p: &KernelParams, bg: &BackgroundMedium) -> Result<f64> {
    kernel(Kernel::K4, q, p, bg)
}

fn unit_product(x: ProbePoint, z: ProbePoint) -> Result<f64> {
    let c = x.r * z.r;
    if !(x.r >= 0.0 && z.r >= 0.0 && c < 1.0) {
        return Err(DsmError::domain("closed form", format!("r1 r2 = {c} must be < 1")));
    }
    Ok(c)
}

/// Static `H^1` numerator of K1 on the unit disk:
/// `Re{w / (pi (1 - w)^2)}` with `w = r1 r2 e^{i(theta1 - theta2)}`.
pub fn k1_numerator_closed_v0(x: ProbePoint, z: ProbePoint) -> Result<f64> {
    let c = unit_product(x, z)?;
    let w = Complex64::from_polar(c, x.theta - z.theta);
    let one = Complex64::new(1.0, 0.0);
    Ok((w / (PI * (one - w).powi(2))).re)
}

/// Static `H^1` numerator of K4 on the unit disk, from
/// `sum n^3 w^n = w (w^2 + 4w + 1) / (1 - w)^4`.
pub fn k4_numerator_closed_v0(x: ProbePoint, z: ProbePoint, dx: Direction, dz: Direction) -> Result<f64> {
    let c = unit_product(x, z)?;
    let w = Complex64::from_polar(c, z.theta - x.theta);
    let one = Complex64::new(1.0, 0.0);
    let v = (w * w + 4.0 * w + one) / (PI * (one - w).powi(4));
    Ok((Complex64::from_polar(1.0, dz.alpha - dx.alpha) * v).re)
}

/// Result of an argmax scan.
#[derive(Clone, Copy, Debug)]
pub struct ArgmaxResult {
    /// Refined maximizer.
    pub location: ProbePoint,
    pub value: f64,
    /// Best grid point before refinement.
    pub grid_location: ProbePoint,
    /// Set when `max / mean < 1.05`.
    pub flat: bool,
}

/// Sampling points for a scan.
#[derive(Clone, Copy, Debug)]
pub enum ScanGrid {
    /// `count` radii evenly spaced on `[r_min, r_max]` along angle `theta`.
    Radial { theta: f64, r_min: f64, r_max: f64, count: usize },
    /// Cartesian lattice clipped to `r <= max_radius`.
    Cartesian { spacing: f64, max_radius: f64 },
}

impl ScanGrid {
    pub fn points(&self) -> Vec<ProbePoint> {
        match *self {
            ScanGrid::Radial { theta, r_min, r_max, count } => (0..count)
                .map(|i| {
                    let t = if count == 1 { 0.0 } else { i as f64 / (count - 1) as f64 };
                    ProbePoint::polar(r_min + t * (r_max - r_min), theta)
                })
                .collect(),
            ScanGrid::Cartesian { spacing, max_radius } => lattice(spacing, max_radius)
                .into_iter()
                .map(|(_, _, x, y)| ProbePoint::cartesian(x, y))
                .collect(),
        }
    }

    fn step(&self) -> f64 {
        match *self {
            ScanGrid::Radial { r_min, r_max, count, .. } => (r_max - r_min) / (count.max(2) - 1) as f64,
            ScanGrid::Cartesian { spacing, .. } => spacing,
        }
    }

    fn max_radius(&self) -> f64 {
        match *self {
            ScanGrid::Radial { r_max, .. } => r_max,
            ScanGrid::Cartesian { max_radius, .. } => max_radius,
        }
    }
}

/// Square lattice `(i, j, x, y)` with nodes at multiples of `spacing`,
/// clipped to the closed disk of radius `max_radius`, row-major from the
/// lowest `y`.
pub fn lattice(spacing: f64, max_radius: f64) -> Vec<(usize, usize, f64, f64)> {
    let half = (max_radius / spacing + 1e-9).floor() as i64;
    let mut out = Vec::new();
    for j in -half..=half {
        for i in -half..=half {
            let (x, y) = (i as f64 * spacing, j as f64 * spacing);
            if x.hypot(y) <= max_radius + 1e-12 {
                out.push(((i + half) as usize, (j + half) as usize, x, y));
            }
        }
    }
    out
}

/// How the sampling-point direction `d_x` is chosen during a K4 scan.
#[derive(Clone, Copy, Debug)]
pub enum DirectionRule {
    Fixed(Direction),
    /// `alpha = theta_x + offset`.
    Angular { offset: f64 },
}

impl DirectionRule {
    fn at(&self, x: ProbePoint) -> Direction {
        match *self {
            DirectionRule::Fixed(d) => d,
            DirectionRule::Angular { offset } => Direction::new(x.theta + offset),
        }
    }
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Grid argmax with ties broken by the lowest index, plus the flat flag.
pub(crate) fn grid_argmax(values: &[f64]) -> (usize, bool) {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let flat = !(values[best] >= 1.05 * mean) || mean == 0.0;
    (best, flat)
}

/// Maximizes `f` over the grid, then refines by one golden-section search
/// per axis inside a one-step bracket around the best grid point.
pub fn argmax_of(f: impl Fn(ProbePoint) -> f64 + Sync, grid: &ScanGrid) -> Result<ArgmaxResult> {
    let pts = grid.points();
    if pts.is_empty() {
        return Err(DsmError::domain("argmax_scan", "empty scan grid"));
    }
    let values: Vec<f64> = pts.par_iter().map(|p| f(*p)).collect();
    let (best, flat) = grid_argmax(&values);
    if flat {
        log::warn!("argmax scan: flat field (max/mean < 1.05)");
    }
    let h = grid.step();
    let rmax = grid.max_radius();
    let mut loc = pts[best];
    let mut val = values[best];
    match *grid {
        ScanGrid::Radial { theta, .. } => {
            let lo = (loc.r - h).max(0.0);
            let hi = (loc.r + h).min(rmax);
            let (r, v) = golden_max(|r| f(ProbePoint::polar(r, theta)), lo, hi, 40);
            if v > val {
                loc = ProbePoint::polar(r, theta);
                val = v;
            }
        }
        ScanGrid::Cartesian { .. } => {
            let inside = |x: f64, y: f64| x.hypot(y) <= rmax;
            let (x0, y0) = (loc.x(), loc.y());
            let fx = |x: f64| if inside(x, y0) { f(ProbePoint::cartesian(x, y0)) } else { f64::NEG_INFINITY };
            let (x1, v1) = golden_max(fx, x0 - h, x0 + h, 40);
            let x = if v1 > val {
                val = v1;
                x1
            } else {
                x0
            };
            let fy = |y: f64| if inside(x, y) { f(ProbePoint::cartesian(x, y)) } else { f64::NEG_INFINITY };
            let (y1, v2) = golden_max(fy, y0 - h, y0 + h, 40);
            let y = if v2 > val {
                val = v2;
                y1
            } else {
                y0
            };
            loc = ProbePoint::cartesian(x, y);
        }
    }
    Ok(ArgmaxResult {
        location: loc,
        value: val,
        grid_location: pts[best],
        flat,
    })
}

/// Scans `kernel(x, z_fixed)` over sampling points `x`.
///
/// `kernel` must be K1 or K4. For K4 the source needs `dz` and `rule` fixes
/// `d_x` at each sampling point.
pub fn argmax_scan(
    kernel: Kernel,
    source: ProbePoint,
    dz: Option<Direction>,
    rule: Option<DirectionRule>,
    grid: &ScanGrid,
    ctx: &KernelContext,
) -> Result<ArgmaxResult> {
    if !matches!(kernel, Kernel::K1 | Kernel::K4) {
        return Err(DsmError::domain("argmax_scan", "only K1 and K4 scans are supported"));
    }
    if kernel == Kernel::K4 && rule.is_none() {
        return Err(DsmError::domain("argmax_scan", "K4 scans need a direction rule"));
    }
    let src = ctx.source(kernel, source, dz)?;
    let f = |x: ProbePoint| {
        let dx = rule.map(|r| r.at(x));
        ctx.eval_with(kernel, x, dx, &src).unwrap_or(f64::NAN)
    };
    argmax_of(f, grid)
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Precomputed half-order data for the spherical `K1` on the unit ball.
pub struct SphereContext {
    k: f64,
    params: KernelParams,
    /// `[n I_{n-1/2}(k) + (n+1) I_{n+3/2}(k)] / I_{n+1/2}(k)`, index `n`.
    flux: Vec<f64>,
}

impl SphereContext {
    pub fn new(bg: &BackgroundMedium, p: &KernelParams) -> Result<Self> {
        p.validate()?;
        if bg.is_static() || bg.radius != 1.0 {
            return Err(DsmError::UnsupportedBackground(
                "the spherical kernel needs k^2 > 0 on the unit ball".into(),
            ));
        }
        if p.gamma != 1.0 {
            return Err(DsmError::domain("k1_3d", "only gamma = 1 is available in 3D"));
        }
        let k = bg.k();
        let h = bessel_i_half_order_ratios(MAX_ORDER, k)?;
        let flux = (0..=MAX_ORDER)
            .map(|n| {
                let nf = n as f64;
                let down = if n == 0 { 0.0 } else { nf / h[n - 1] };
                down + (nf + 1.0) * h[n]
            })
            .collect();
        Ok(SphereContext { k, params: *p, flux })
    }

    /// `I_{n+1/2}(k r) / (I_{n+1/2}(k) sqrt(r))` for `n = 0..=MAX_ORDER`.
    fn radial(&self, r: f64) -> Result<Vec<f64>> {
        if r == 0.0 {
            let mut v = vec![0.0; MAX_ORDER + 1];
            v[0] = f64::NAN;
            return Ok(v);
        }
        let t = bessel_i_half_ratios(MAX_ORDER, self.k * r, self.k)?;
        Ok(t.into_iter().map(|x| x / r.sqrt()).collect())
    }

    fn check(x: [f64; 3]) -> Result<f64> {
        let r = norm3(x);
        if !(r < 1.0) {
            return Err(DsmError::domain("k1_3d", format!("|x| = {r} must be < 1")));
        }
        Ok(r)
    }

    pub fn numerator(&self, x: [f64; 3], z: [f64; 3]) -> Result<f64> {
        let (r1, r2) = (Self::check(x)?, Self::check(z)?);
        if r1 == 0.0 || r2 == 0.0 {
            return Ok(0.0);
        }
        let cos = ((x[0] * z[0] + x[1] * z[1] + x[2] * z[2]) / (r1 * r2)).clamp(-1.0, 1.0);
        let (a, b) = (self.radial(r1)?, self.radial(r2)?);
        let mut sum = 0.0;
        let mut largest = 0.0f64;
        for n in 1..=MAX_ORDER {
            let nf = n as f64;
            let term = nf * (nf + 1.0) * (2.0 * nf + 1.0).powi(2) * a[n] * b[n] * legendre_p(n, cos)?
                / (4.0 * PI * self.k * self.flux[n]);
            sum += term;
            largest = largest.max(term.abs());
            if n > 2 && term.abs() <= 1e-16 * largest && a[n] * b[n] <= 1e-16 * largest {
                break;
            }
        }
        Ok(sum)
    }

    /// `(|zeta_x|_{H^1}^2, |G_x|_{H^1}^2)` on the sphere.
    pub fn seminorms_sq(&self, r: f64) -> Result<(f64, f64)> {
        let a = self.radial(r)?;
        let (mut z, mut g) = (0.0, 0.0);
        for n in 1..=MAX_ORDER {
            let nf = n as f64;
            let base = nf * (nf + 1.0) * (2.0 * nf + 1.0) * a[n] * a[n] / (4.0 * PI);
            z += base;
            g += base * (2.0 * nf + 1.0).powi(2) / (self.k * self.k * self.flux[n].powi(2));
            if base <= 1e-17 * z {
                break;
            }
        }
        Ok((z, g))
    }

    /// Spherical K1 with denominators at `x` and the origin clamp.
    pub fn k1(&self, x: [f64; 3], z: [f64; 3]) -> Result<f64> {
        let num = self.numerator(x, z)?;
        let r = Self::check(x)?.max(self.params.clamp_eta);
        let (zs, gs) = self.seminorms_sq(r)?;
        Ok(num.abs() / (zs.sqrt().powf(self.params.n1) * gs.sqrt().powf(self.params.n2)))
    }
}

/// Spherical K1 on the unit ball.
pub fn k1_3d(x: [f64; 3], z: [f64; 3], p: &KernelParams, bg: &BackgroundMedium) -> Result<f64> {
    SphereContext::new(bg, p)?.k1(x, z)
}

/// Cubic lattice clipped to the ball of radius `max_radius`.
pub fn lattice_3d(spacing: f64, max_radius: f64) -> Vec<[f64; 3]> {
    let half = (max_radius / spacing + 1e-9).floor() as i64;
    let mut out = Vec::new();
    for k in -half..=half {
        for j in -half..=half {
            for i in -half..=half {
                let p = [i as f64 * spacing, j as f64 * spacing, k as f64 * spacing];
                if norm3(p) <= max_radius + 1e-12 {
                    out.push(p);
                }
            }
        }
    }
    out
}

/// Refined maximizer, its value and the sampled `(point, value)` field.
pub type Scan3d = ([f64; 3], f64, Vec<([f64; 3], f64)>);

/// Scans the spherical K1 over sampling points with the source fixed;
/// returns the refined maximizer, its value and the full field.
pub fn argmax_scan_3d(
    source: [f64; 3],
    spacing: f64,
    max_radius: f64,
    ctx: &SphereContext,
) -> Result<Scan3d> {
    let pts = lattice_3d(spacing, max_radius);
    let vals: Vec<f64> = pts
        .par_iter()
        .map(|p| ctx.k1(*p, source))
        .collect::<Result<_>>()?;
    let (best, flat) = grid_argmax(&vals);
    if flat {
        log::warn!("3D scan: flat field (max/mean < 1.05)");
    }
    let mut loc = pts[best];
    let mut val = vals[best];
    for axis in 0..3 {
        let f = |t: f64| {
            let mut p = loc;
            p[axis] = t;
            if norm3(p) <= max_radius {
                ctx.k1(p, source).unwrap_or(f64::NEG_INFINITY)
            } else {
                f64::NEG_INFINITY
            }
        };
        let (t, v) = golden_max(f, loc[axis] - spacing, loc[axis] + spacing, 40);
        if v > val {
            loc[axis] = t;
            val = v;
        }
    }
    Ok((loc, val, pts.into_iter().zip(vals).collect()))
}
