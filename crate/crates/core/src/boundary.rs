//! Boundary traces on the circle, their Fourier coefficients and the
//! `H^gamma` duality product.
//!
//! Coefficients follow `f(n) = int_0^{2pi} f(theta) e^{-i n theta} dtheta`,
//! and the pairing is `sum_n R |n|^{2 gamma} / (2 pi) conj(f(n)) g(n)`.

use crate::error::{DsmError, Result};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

/// Uniformly sampled boundary data on the circle of radius `radius`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryTrace {
    radius: f64,
    angles: Vec<f64>,
    values: Vec<Complex64>,
}

fn uniform_angles(n: usize) -> Vec<f64> {
    (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
}

impl BoundaryTrace {
    pub fn new(radius: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(DsmError::domain("BoundaryTrace::new", format!("radius {radius}")));
        }
        if values.len() < 4 {
            return Err(DsmError::domain(
                "BoundaryTrace::new",
                format!("{} samples, need at least 4", values.len()),
            ));
        }
        Ok(BoundaryTrace {
            radius,
            angles: uniform_angles(values.len()),
            values,
        })
    }

    /// Samples `f` at `n` uniform angles.
    pub fn from_fn(radius: f64, n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = uniform_angles(n).into_iter().map(f).collect();
        Self::new(radius, values)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        BoundaryTrace {
            radius: self.radius,
            angles: self.angles.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Checks that `other` was sampled on the same probe layout.
    pub fn check_layout(&self, other: &BoundaryTrace) -> Result<()> {
        if self.len() != other.len() {
            return Err(DsmError::Layout(format!(
                "{} vs {} samples",
                self.len(),
                other.len()
            )));
        }
        if self.radius != other.radius {
            return Err(DsmError::RadiusMismatch {
                left: self.radius,
                right: other.radius,
            });
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "theta,re,im")?;
        for (t, v) in self.angles.iter().zip(&self.values) {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", t, v.re, v.im)?;
        }
        Ok(())
    }

    pub fn write_csv_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    /// Reads the `theta,re,im` format; angles must be uniform from 0.
    pub fn read_csv<R: Read>(reader: R, radius: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["theta", "re", "im"] {
            return Err(DsmError::Parse(format!("expected header theta,re,im, got {:?}", headers)));
        }
        let mut angles = Vec::new();
        let mut values = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let field = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| DsmError::Parse(format!("row {}: missing column {i}", line + 2)))?
                    .parse::<f64>()
                    .map_err(|e| DsmError::Parse(format!("row {}: {e}", line + 2)))
            };
            angles.push(field(0)?);
            values.push(Complex64::new(field(1)?, field(2)?));
        }
        let trace = Self::new(radius, values)?;
        for (j, (a, b)) in angles.iter().zip(&trace.angles).enumerate() {
            if (a - b).abs() > 1e-9 {
                return Err(DsmError::Layout(format!(
                    "sample {j} at angle {a}, expected uniform angle {b}"
                )));
            }
        }
        Ok(trace)
    }

    pub fn read_csv_file(path: impl AsRef<Path>, radius: f64) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(f, radius)
    }
}

/// Fourier coefficients for modes `-max_mode..=max_mode`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCoeffs {
    radius: f64,
    max_mode: usize,
    coeffs: Vec<Complex64>,
}

impl FourierCoeffs {
    pub fn zeros(radius: f64, max_mode: usize) -> Self {
        FourierCoeffs {
            radius,
            max_mode,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * max_mode + 1],
        }
    }

    pub fn from_fn(radius: f64, max_mode: usize, f: impl Fn(i64) -> Complex64) -> Self {
        let m = max_mode as i64;
        FourierCoeffs {
            radius,
            max_mode,
            coeffs: (-m..=m).map(f).collect(),
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn max_mode(&self) -> usize {
        self.max_mode
    }

    /// Coefficient of mode `n`; zero outside the stored range.
    pub fn get(&self, n: i64) -> Complex64 {
        if n.unsigned_abs() as usize > self.max_mode {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[(n + self.max_mode as i64) as usize]
    }

    pub fn set(&mut self, n: i64, v: Complex64) {
        let idx = (n + self.max_mode as i64) as usize;
        self.coeffs[idx] = v;
    }

    /// `(mode, coefficient)` pairs in ascending mode order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let m = self.max_mode as i64;
        (-m..=m).zip(self.coeffs.iter().copied())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        FourierCoeffs {
            radius: self.radius,
            max_mode: self.max_mode,
            coeffs: self.coeffs.iter().map(|v| v * c).collect(),
        }
    }

    /// Adds `c * other` in place; modes beyond `self.max_mode` are dropped.
    pub fn add_scaled(&mut self, other: &FourierCoeffs, c: Complex64) -> Result<()> {
        check_radius(self.radius, other.radius)?;
        let m = self.max_mode.min(other.max_mode) as i64;
        for n in -m..=m {
            let v = self.get(n) + c * other.get(n);
            self.set(n, v);
        }
        Ok(())
    }

    /// Inverse series `(1/2pi) sum_n f(n) e^{i n theta}`.
    pub fn evaluate(&self, theta: f64) -> Complex64 {
        self.iter()
            .map(|(n, c)| c * Complex64::from_polar(1.0, n as f64 * theta))
            .sum::<Complex64>()
            / (2.0 * PI)
    }

    /// Samples the inverse series at `n` uniform angles.
    pub fn synthesize(&self, n: usize) -> Result<BoundaryTrace> {
        BoundaryTrace::from_fn(self.radius, n, |t| self.evaluate(t))
    }
}

/// Sobolev scale of the duality product.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SobolevParams {
    pub gamma: f64,
}

impl Default for SobolevParams {
    fn default() -> Self {
        SobolevParams { gamma: 1.0 }
    }
}

impl SobolevParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(DsmError::domain("SobolevParams::new", format!("gamma = {gamma}")));
        }
        Ok(SobolevParams { gamma })
    }

    /// `|n|^{2 gamma}` with the zero mode weighted 0 for `gamma > 0` and 1
    /// for `gamma = 0`, so that `gamma = 0` is the plain L2 pairing.
    pub fn weight(&self, n: i64) -> f64 {
        mode_weight(n, self.gamma)
    }
}

pub(crate) fn mode_weight(n: i64, gamma: f64) -> f64 {
    if n == 0 {
        return if gamma == 0.0 { 1.0 } else { 0.0 };
    }
    (n.unsigned_abs() as f64).powf(2.0 * gamma)
}

fn check_radius(a: f64, b: f64) -> Result<()> {
    if (a - b).abs() > 1e-14 * a.abs().max(b.abs()) {
        return Err(DsmError::RadiusMismatch { left: a, right: b });
    }
    Ok(())
}

/// `min(60, N/2 - 1)`.
pub fn default_max_mode(samples: usize) -> usize {
    60.min((samples / 2).saturating_sub(1))
}

/// Trapezoidal Fourier coefficients of a uniformly sampled trace.
pub fn dft(trace: &BoundaryTrace, max_mode: usize) -> Result<FourierCoeffs> {
    let n = trace.len();
    if 2 * max_mode + 2 > n {
        return Err(DsmError::Aliasing {
            max_mode,
            samples: n,
        });
    }
    let roots: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
        .collect();
    let w = 2.0 * PI / n as f64;
    Ok(FourierCoeffs::from_fn(trace.radius, max_mode, |mode| {
        let step = mode.rem_euclid(n as i64) as usize;
        let mut idx = 0usize;
        let mut acc = Complex64::new(0.0, 0.0);
        for v in &trace.values {
            acc += v * roots[idx];
            idx += step;
            if idx >= n {
                idx -= n;
            }
        }
        acc * w
    }))
}

/// `sum_n R |n|^{2 gamma} / (2 pi) conj(f(n)) g(n)` over the common modes.
pub fn sobolev_pair(f: &FourierCoeffs, g: &FourierCoeffs, p: SobolevParams) -> Result<Complex64> {
    check_radius(f.radius, g.radius)?;
    let m = f.max_mode.min(g.max_mode) as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for n in -m..=m {
        let w = p.weight(n);
        if w != 0.0 {
            acc += w * f.get(n).conj() * g.get(n);
        }
    }
    Ok(acc * f.radius / (2.0 * PI))
}

/// `|f|_{H^gamma}`, the square root of the self-pairing.
pub fn sobolev_seminorm(f: &FourierCoeffs, p: SobolevParams) -> Result<f64> {
    let s: f64 = f.iter().map(|(n, c)| p.weight(n) * c.norm_sqr()).sum();
    Ok((s * f.radius / (2.0 * PI)).sqrt())
}

/// Multiplies mode `n` by `|n|^{2 gamma}`, the spectral form of the
/// fractional surface Laplacian.
pub fn surface_laplacian_power(f: &FourierCoeffs, gamma: f64) -> Result<FourierCoeffs> {
    let p = SobolevParams::new(gamma)?;
    Ok(FourierCoeffs::from_fn(f.radius, f.max_mode, |n| f.get(n) * p.weight(n)))
}
