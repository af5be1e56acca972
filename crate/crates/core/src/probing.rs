//! Monopole and dipole probes, Green traces and their gradients on the disk.
//!
//! Everything is expressed through the Neumann-to-Dirichlet eigenpairs
//! `phi_n(x) = I_n(kr)/I_n(kR) e^{i n theta}` and
//! `lambda_n = I_n(kR) / (k I_n'(kR))` (or `(r/R)^|n| e^{i n theta}` and
//! `R/|n|` when `k = 0`). Mode `n` of a probe trace holds the conjugate of
//! the corresponding eigen-quantity divided by `R`, so that pairing a probe
//! with data sums `phi_n(x) * data(n)`.

use crate::boundary::{mode_weight, FourierCoeffs, SobolevParams};
use crate::error::{DsmError, Result};
use crate::special::{bessel_i_order_ratios, bessel_i_ratios, MAX_ORDER};
use num_complex::Complex64;
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Homogeneous background `sigma0`, `v0` on the disk of radius `radius`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BackgroundMedium {
    pub sigma0: f64,
    pub v0: f64,
    pub ksq: f64,
    pub radius: f64,
}

impl BackgroundMedium {
    pub fn new(sigma0: f64, v0: f64, radius: f64) -> Result<Self> {
        if !(sigma0 > 0.0) || !sigma0.is_finite() {
            return Err(DsmError::config("background.sigma0", format!("{sigma0} must be > 0")));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(DsmError::config("background.radius", format!("{radius} must be > 0")));
        }
        if !v0.is_finite() {
            return Err(DsmError::config("background.v0", "must be finite"));
        }
        if v0 < 0.0 {
            return Err(DsmError::UnsupportedBackground(format!(
                "v0 = {v0} gives k^2 < 0; only k^2 >= 0 is supported"
            )));
        }
        Ok(BackgroundMedium {
            sigma0,
            v0,
            ksq: v0 / sigma0,
            radius,
        })
    }

    /// Unit-radius background with `k^2 = ksq` (`sigma0 = 1`).
    pub fn with_ksq(ksq: f64) -> Result<Self> {
        Self::new(1.0, ksq, 1.0)
    }

    pub fn k(&self) -> f64 {
        self.ksq.sqrt()
    }

    pub fn is_static(&self) -> bool {
        self.ksq == 0.0
    }
}

/// Interior point in polar form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbePoint {
    pub r: f64,
    pub theta: f64,
}

impl ProbePoint {
    pub fn polar(r: f64, theta: f64) -> Self {
        ProbePoint { r, theta }
    }

    pub fn cartesian(x: f64, y: f64) -> Self {
        let r = x.hypot(y);
        let theta = if r == 0.0 { 0.0 } else { y.atan2(x) };
        ProbePoint { r, theta }
    }

    pub fn x(&self) -> f64 {
        self.r * self.theta.cos()
    }

    pub fn y(&self) -> f64 {
        self.r * self.theta.sin()
    }

    pub fn xy(&self) -> [f64; 2] {
        [self.x(), self.y()]
    }

    pub fn distance(&self, other: &ProbePoint) -> f64 {
        (self.x() - other.x()).hypot(self.y() - other.y())
    }

    pub fn check_interior(&self, bg: &BackgroundMedium) -> Result<()> {
        if !(self.r >= 0.0) || !(self.r < bg.radius) || !self.theta.is_finite() {
            return Err(DsmError::domain(
                "ProbePoint",
                format!("r = {} must lie in [0, {})", self.r, bg.radius),
            ));
        }
        Ok(())
    }
}

/// Unit direction `d = (-sin alpha, cos alpha)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction {
    pub alpha: f64,
}

impl Direction {
    pub fn new(alpha: f64) -> Self {
        Direction { alpha }
    }

    /// Direction of a nonzero vector.
    pub fn from_vector(v: [f64; 2]) -> Option<Self> {
        if v[0] == 0.0 && v[1] == 0.0 {
            return None;
        }
        Some(Direction {
            alpha: (-v[0]).atan2(v[1]),
        })
    }

    pub fn vector(&self) -> [f64; 2] {
        [-self.alpha.sin(), self.alpha.cos()]
    }

    pub fn dot(&self, g: [Complex64; 2]) -> Complex64 {
        let d = self.vector();
        g[0] * d[0] + g[1] * d[1]
    }

    /// Real unit direction maximizing `|d . g|` for a complex vector `g`.
    ///
    /// With `psi = arg(g . g) / 2`, `e^{-i psi} g = a + i b` has `a . b = 0`
    /// and `|a| >= |b|`, so `a` is the top eigenvector of
    /// `Re(g) Re(g)^T + Im(g) Im(g)^T`.
    pub fn maximizing(g: [Complex64; 2]) -> Option<Self> {
        let gg = g[0] * g[0] + g[1] * g[1];
        let rot = Complex64::from_polar(1.0, -0.5 * gg.arg());
        let a = [(rot * g[0]).re, (rot * g[1]).re];
        Self::from_vector(a)
    }
}

/// Which boundary function a spectrum describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeKind {
    /// Monopole probe `zeta_x`.
    Monopole,
    /// Dipole probe `eta_{x,d}`.
    Dipole,
    /// Green trace `G_x`.
    Green,
    /// Gradient trace `d . grad G_x`.
    GradGreen,
}

impl ProbeKind {
    pub fn needs_direction(self) -> bool {
        matches!(self, ProbeKind::Dipole | ProbeKind::GradGreen)
    }
}

/// Cartesian basis vector for the pointwise dipole series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    E1,
    E2,
}

/// Fourier coefficients of one probe family at one source.
#[derive(Clone, Debug)]
pub struct ProbeSpectrum {
    pub kind: ProbeKind,
    pub source: ProbePoint,
    pub direction: Option<Direction>,
    pub coeffs: FourierCoeffs,
    pub background: BackgroundMedium,
    /// Set when the last retained mode exceeds `1e-12` of the largest.
    pub truncated: bool,
}

/// Eigenvalues `lambda_n`, `n = 0..=nmax`, of one background.
#[derive(Clone, Debug)]
pub struct Eigenvalues {
    values: Vec<f64>,
    is_static: bool,
}

impl Eigenvalues {
    pub fn new(bg: &BackgroundMedium, nmax: usize) -> Result<Self> {
        if nmax > MAX_ORDER {
            return Err(DsmError::OrderTooLarge {
                order: nmax,
                max: MAX_ORDER,
            });
        }
        let values = if bg.is_static() {
            (0..=nmax)
                .map(|n| if n == 0 { f64::NAN } else { bg.radius / n as f64 })
                .collect()
        } else {
            let k = bg.k();
            let q = bessel_i_order_ratios(nmax, k * bg.radius)?;
            (0..=nmax)
                .map(|n| {
                    if n == 0 {
                        1.0 / (k * q[0])
                    } else {
                        2.0 / (k * (1.0 / q[n - 1] + q[n]))
                    }
                })
                .collect()
        };
        Ok(Eigenvalues {
            values,
            is_static: bg.is_static(),
        })
    }

    pub fn nmax(&self) -> usize {
        self.values.len() - 1
    }

    /// `lambda_n`; the static zero mode is undefined.
    pub fn get(&self, n: i64) -> Result<f64> {
        let m = n.unsigned_abs() as usize;
        if self.is_static && m == 0 {
            return Err(DsmError::domain("eigenvalue", "n = 0 is undefined for k^2 = 0"));
        }
        self.values.get(m).copied().ok_or(DsmError::OrderTooLarge {
            order: m,
            max: self.nmax(),
        })
    }

    /// Multiplier used for Green traces: `lambda_n`, and 0 for the static
    /// zero mode (the Green trace has zero mean in that case).
    pub(crate) fn green_factor(&self, m: usize) -> f64 {
        if self.is_static && m == 0 {
            0.0
        } else {
            self.values[m]
        }
    }
}

/// `phi_n(x)` and `grad phi_n(x)` for `n = 0..=nmax` at one point.
#[derive(Clone, Debug)]
pub struct PointModes {
    pub point: ProbePoint,
    phi: Vec<Complex64>,
    grad: Vec<[Complex64; 2]>,
}

impl PointModes {
    pub fn new(x: ProbePoint, bg: &BackgroundMedium, nmax: usize) -> Result<Self> {
        x.check_interior(bg)?;
        if nmax > MAX_ORDER {
            return Err(DsmError::OrderTooLarge {
                order: nmax,
                max: MAX_ORDER,
            });
        }
        let radius = bg.radius;
        let (c, s) = (x.theta.cos(), x.theta.sin());
        let mut phi = Vec::with_capacity(nmax + 1);
        let mut grad = Vec::with_capacity(nmax + 1);
        if bg.is_static() {
            let rr = x.r / radius;
            for n in 0..=nmax {
                let e = Complex64::from_polar(1.0, n as f64 * x.theta);
                phi.push(e * rr.powi(n as i32));
                if n == 0 {
                    grad.push([ZERO, ZERO]);
                } else {
                    let g = Complex64::from_polar(
                        n as f64 * rr.powi(n as i32 - 1) / radius,
                        (n as f64 - 1.0) * x.theta,
                    );
                    grad.push([g, g * Complex64::i()]);
                }
            }
        } else {
            let k = bg.k();
            let t = bessel_i_ratios(nmax + 1, k * x.r, k * radius)?;
            let q = bessel_i_order_ratios(nmax, k * radius)?;
            for n in 0..=nmax {
                let e = Complex64::from_polar(1.0, n as f64 * x.theta);
                phi.push(e * t[n]);
                // I_{n+-1}(kr) / I_n(kR); I_{-1} = I_1.
                let up = t[n + 1] * q[n];
                let down = if n == 0 { up } else { t[n - 1] / q[n - 1] };
                let radial = 0.5 * k * (down + up);
                // n I_n(kr) / (r I_n(kR)) without dividing by r.
                let tangential = Complex64::new(0.0, 0.5 * k * (down - up));
                let gx = radial * c - tangential * s;
                let gy = radial * s + tangential * c;
                grad.push([e * gx, e * gy]);
            }
        }
        Ok(PointModes { point: x, phi, grad })
    }

    pub fn nmax(&self) -> usize {
        self.phi.len() - 1
    }

    pub fn phi(&self, n: i64) -> Complex64 {
        let v = self.phi[n.unsigned_abs() as usize];
        if n < 0 {
            v.conj()
        } else {
            v
        }
    }

    pub fn grad(&self, n: i64) -> [Complex64; 2] {
        let v = self.grad[n.unsigned_abs() as usize];
        if n < 0 {
            [v[0].conj(), v[1].conj()]
        } else {
            v
        }
    }

    /// The eigen-quantity behind mode `n` of a probe of the given kind
    /// (before conjugation and division by `R`).
    fn base(&self, kind: ProbeKind, d: Option<Direction>, eig: &Eigenvalues, n: i64) -> Complex64 {
        let m = n.unsigned_abs() as usize;
        let v = match kind {
            ProbeKind::Monopole | ProbeKind::Green => self.phi(n),
            ProbeKind::Dipole | ProbeKind::GradGreen => d.expect("direction checked").dot(self.grad(n)),
        };
        match kind {
            ProbeKind::Green | ProbeKind::GradGreen => v * eig.green_factor(m),
            _ => v,
        }
    }

    /// Mode-`n` Fourier coefficient of the probe trace.
    pub fn coefficient(
        &self,
        kind: ProbeKind,
        d: Option<Direction>,
        eig: &Eigenvalues,
        n: i64,
        radius: f64,
    ) -> Complex64 {
        self.base(kind, d, eig, n).conj() / radius
    }

    /// `H^gamma` seminorm of the probe trace summed over all available modes
    /// with early exit once terms fall below `1e-12` of the largest. The
    /// flag reports whether the cap was reached first.
    pub fn seminorm(
        &self,
        kind: ProbeKind,
        d: Option<Direction>,
        eig: &Eigenvalues,
        gamma: f64,
        radius: f64,
    ) -> (f64, bool) {
        let nmax = self.nmax().min(eig.nmax()) as i64;
        let mut sum = 0.0;
        let mut largest = 0.0f64;
        let mut prev = f64::INFINITY;
        for n in 0..=nmax {
            let w = mode_weight(n, gamma);
            let mut term = 0.0;
            if w != 0.0 {
                term = w * self.base(kind, d, eig, n).norm_sqr();
                if n > 0 {
                    term += w * self.base(kind, d, eig, -n).norm_sqr();
                }
            }
            sum += term;
            largest = largest.max(term);
            if n >= 2 && term <= 1e-12 * largest && term <= prev {
                return ((sum / (2.0 * PI * radius)).sqrt(), false);
            }
            prev = term;
        }
        ((sum / (2.0 * PI * radius)).sqrt(), true)
    }
}

fn require_direction(kind: ProbeKind, d: Option<Direction>) -> Result<()> {
    if kind.needs_direction() && d.is_none() {
        return Err(DsmError::domain("probe_coeffs", format!("{kind:?} needs a direction")));
    }
    Ok(())
}

/// `phi_n(x)`.
pub fn eigenfunction(n: i64, x: ProbePoint, bg: &BackgroundMedium) -> Result<Complex64> {
    let modes = PointModes::new(x, bg, n.unsigned_abs() as usize)?;
    Ok(modes.phi(n))
}

/// Cartesian `grad phi_n(x)`.
pub fn grad_eigenfunction(n: i64, x: ProbePoint, bg: &BackgroundMedium) -> Result<[Complex64; 2]> {
    let modes = PointModes::new(x, bg, n.unsigned_abs() as usize)?;
    Ok(modes.grad(n))
}

/// `lambda_n`; an error for `n = 0` when `k^2 = 0`.
pub fn eigenvalue(n: i64, bg: &BackgroundMedium) -> Result<f64> {
    Eigenvalues::new(bg, n.unsigned_abs() as usize)?.get(n)
}

fn truncation_flag(coeffs: &FourierCoeffs) -> bool {
    let m = coeffs.max_mode() as i64;
    let largest = coeffs.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
    let last = coeffs.get(m).norm().max(coeffs.get(-m).norm());
    largest > 0.0 && last > 1e-12 * largest
}

/// Fourier coefficients of a probe (or Green) trace for `|n| <= max_mode`.
pub fn probe_coeffs(
    kind: ProbeKind,
    x: ProbePoint,
    d: Option<Direction>,
    bg: &BackgroundMedium,
    max_mode: usize,
) -> Result<ProbeSpectrum> {
    require_direction(kind, d)?;
    let modes = PointModes::new(x, bg, max_mode)?;
    let eig = Eigenvalues::new(bg, max_mode)?;
    Ok(spectrum_from_modes(kind, &modes, d, &eig, bg, max_mode))
}

pub(crate) fn spectrum_from_modes(
    kind: ProbeKind,
    modes: &PointModes,
    d: Option<Direction>,
    eig: &Eigenvalues,
    bg: &BackgroundMedium,
    max_mode: usize,
) -> ProbeSpectrum {
    let coeffs = FourierCoeffs::from_fn(bg.radius, max_mode, |n| {
        modes.coefficient(kind, d, eig, n, bg.radius)
    });
    let truncated = truncation_flag(&coeffs);
    if truncated {
        log::debug!(
            "{kind:?} probe at r = {:.4} truncated at mode {max_mode}",
            modes.point.r
        );
    }
    ProbeSpectrum {
        kind,
        source: modes.point,
        direction: d,
        coeffs,
        background: *bg,
        truncated,
    }
}

/// `|probe|_{H^gamma}` from the modal series (up to order 200).
pub fn seminorm(
    kind: ProbeKind,
    x: ProbePoint,
    d: Option<Direction>,
    bg: &BackgroundMedium,
    gamma: f64,
) -> Result<f64> {
    require_direction(kind, d)?;
    SobolevParams::new(gamma)?;
    let modes = PointModes::new(x, bg, MAX_ORDER)?;
    let eig = Eigenvalues::new(bg, MAX_ORDER)?;
    let (v, capped) = modes.seminorm(kind, d, &eig, gamma, bg.radius);
    if capped {
        log::debug!("{kind:?} seminorm at r = {:.4} reached the mode cap", x.r);
    }
    Ok(v)
}

/// Closed-form `H^1` seminorms for `k^2 = 0`.
pub fn seminorm_closed_v0(
    kind: ProbeKind,
    x: ProbePoint,
    bg: &BackgroundMedium,
) -> Result<f64> {
    if !bg.is_static() {
        return Err(DsmError::UnsupportedBackground("closed forms need k^2 = 0".into()));
    }
    let radius = bg.radius;
    let t = x.r / radius;
    if !(0.0..1.0).contains(&t) {
        return Err(DsmError::domain("seminorm_closed_v0", format!("r/R = {t}")));
    }
    let t2 = t * t;
    let u = 1.0 - t2;
    let sq = match kind {
        ProbeKind::Monopole => t2 * (1.0 + t2) / (PI * radius * u.powi(3)),
        ProbeKind::Dipole => {
            (t2 * t2 * t2 + 11.0 * t2 * t2 + 11.0 * t2 + 1.0) / (PI * radius * u.powi(5))
        }
        ProbeKind::Green => radius * t2 / (PI * u),
        ProbeKind::GradGreen => radius * (1.0 + t2) / (PI * u.powi(3)),
    };
    Ok(sq.sqrt())
}

fn require_pointwise(bg: &BackgroundMedium) -> Result<()> {
    if bg.is_static() {
        return Err(DsmError::UnsupportedBackground(
            "pointwise probe series need k^2 > 0".into(),
        ));
    }
    if bg.radius != 1.0 {
        return Err(DsmError::UnsupportedBackground(
            "pointwise probe series are defined on the unit disk".into(),
        ));
    }
    Ok(())
}

/// Boundary value `zeta_x(theta_y)` on the unit disk, summed over
/// `|n| <= max_mode`:
/// `(1/2pi) sum_n I_n(k r_x)/I_n(k) e^{i n (theta_y - theta_x)}`.
pub fn zeta_pointwise(x: ProbePoint, y_angle: f64, bg: &BackgroundMedium, max_mode: usize) -> Result<Complex64> {
    require_pointwise(bg)?;
    x.check_interior(bg)?;
    let k = bg.k();
    let t = bessel_i_ratios(max_mode, k * x.r, k)?;
    let mut acc = t[0];
    for (n, tn) in t.iter().enumerate().skip(1) {
        acc += 2.0 * tn * (n as f64 * (y_angle - x.theta)).cos();
    }
    Ok(Complex64::new(acc / (2.0 * PI), 0.0))
}

/// Boundary value `eta_{x,e}(theta_y)` on the unit disk for a basis vector.
///
/// Mode `n` carries `e^{-i n theta_x} (k cos(theta_x) I_n'(k r)/I_n(k)
/// + i n sin(theta_x) I_n(k r)/(r I_n(k)))` for `e1`, and the `e2` analogue
/// with `sin`/`cos` swapped and the imaginary part negated.
pub fn eta_pointwise(
    x: ProbePoint,
    basis: Axis,
    y_angle: f64,
    bg: &BackgroundMedium,
    max_mode: usize,
) -> Result<Complex64> {
    require_pointwise(bg)?;
    x.check_interior(bg)?;
    let k = bg.k();
    let t = bessel_i_ratios(max_mode + 1, k * x.r, k)?;
    let q = bessel_i_order_ratios(max_mode, k)?;
    let (c, s) = (x.theta.cos(), x.theta.sin());
    let mut acc = ZERO;
    let m = max_mode as i64;
    for n in -m..=m {
        let a = n.unsigned_abs() as usize;
        let up = t[a + 1] * q[a];
        let down = if a == 0 { up } else { t[a - 1] / q[a - 1] };
        let deriv = 0.5 * k * (down + up);
        // n I_n(kr) / (r I_n(k)), signed with n.
        let over_r = n.signum() as f64 * 0.5 * k * (down - up);
        let amp = match basis {
            Axis::E1 => Complex64::new(deriv * c, over_r * s),
            Axis::E2 => Complex64::new(deriv * s, -over_r * c),
        };
        acc += amp * Complex64::from_polar(1.0, n as f64 * (y_angle - x.theta));
    }
    Ok(acc / (2.0 * PI))
}
