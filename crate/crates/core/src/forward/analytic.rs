//! Separation-of-variables solutions for a centred disk inclusion.

use super::medium::{Influx, InclusionKind};
use crate::error::{DsmError, Result};
use crate::probing::{BackgroundMedium, ProbePoint};
use crate::special::{bessel_i, bessel_i_prime, bessel_k, bessel_k_prime};
use num_complex::Complex64;

fn require_helmholtz(bg: &BackgroundMedium) -> Result<f64> {
    if bg.is_static() {
        return Err(DsmError::UnsupportedBackground("transmission oracles need k^2 > 0".into()));
    }
    Ok(bg.k())
}

/// Interior wavenumber and interior conductivity of a centred inclusion.
fn interior(bg: &BackgroundMedium, kind: InclusionKind) -> Result<(f64, f64)> {
    match kind {
        InclusionKind::Conductivity(s) if s > 0.0 => Ok(((bg.v0 / s).sqrt(), s)),
        InclusionKind::Potential(v) if v > 0.0 => Ok(((v / bg.sigma0).sqrt(), bg.sigma0)),
        _ => Err(DsmError::domain(
            "analytic_transmission",
            format!("{kind:?}: interior value must be > 0"),
        )),
    }
}

fn check_inclusion_radius(bg: &BackgroundMedium, ri: f64) -> Result<()> {
    if !(ri > 0.0 && ri < bg.radius) {
        return Err(DsmError::domain("analytic_transmission", format!("inclusion radius {ri} not in (0, R)")));
    }
    Ok(())
}

/// Free-space scattering amplitude of mode `m` for a centred disk of radius
/// `ri`, with incident field `I_m(kr) e^{im theta} / I_m(kR)`.
///
/// The scattered field outside the inclusion is `beta K_m(kr) e^{im theta}`
/// when the outer boundary is ignored.
pub fn analytic_transmission(m: usize, bg: &BackgroundMedium, ri: f64, kind: InclusionKind) -> Result<f64> {
    if m == 0 {
        return Err(DsmError::domain("analytic_transmission", "mode must be >= 1"));
    }
    let k = require_helmholtz(bg)?;
    check_inclusion_radius(bg, ri)?;
    let (kin, _) = interior(bg, kind)?;
    let (i_in, di_in) = (bessel_i(m, kin * ri)?, bessel_i_prime(m, kin * ri)?);
    let (i_out, di_out) = (bessel_i(m, k * ri)?, bessel_i_prime(m, k * ri)?);
    let (k_out, dk_out) = (bessel_k(m, k * ri)?, bessel_k_prime(m, k * ri)?);
    let norm = bessel_i(m, k * bg.radius)?;
    let (num, den) = match kind {
        InclusionKind::Conductivity(_) => (
            kin * i_in * di_out - k * di_in * i_out,
            k * di_in * k_out - kin * i_in * dk_out,
        ),
        InclusionKind::Potential(_) => (
            k * i_in * di_out - kin * di_in * i_out,
            kin * di_in * k_out - k * i_in * dk_out,
        ),
    };
    Ok(num / den / norm)
}

/// `|beta_m| / |beta~_m|` for conductivity `sigma1` and potential `v1` in
/// the same centred disk.
pub fn decoupling_ratio(m: usize, bg: &BackgroundMedium, ri: f64, sigma1: f64, v1: f64) -> Result<f64> {
    let b = analytic_transmission(m, bg, ri, InclusionKind::Conductivity(sigma1))?;
    let bt = analytic_transmission(m, bg, ri, InclusionKind::Potential(v1))?;
    if bt == 0.0 || !bt.is_finite() || b == 0.0 {
        return Err(DsmError::domain(
            "decoupling_ratio",
            format!("degenerate amplitudes at m = {m}: {b}, {bt}"),
        ));
    }
    Ok(b.abs() / bt.abs())
}

/// `|grad u0(z1)| / |u0(z2)|` for the incident mode `I_m(kr) e^{im theta}`.
pub fn small_inclusion_gradient_ratio(m: usize, z1: ProbePoint, z2: ProbePoint, bg: &BackgroundMedium) -> Result<f64> {
    let k = require_helmholtz(bg)?;
    if m == 0 || !(z1.r > 0.0 && z2.r > 0.0) {
        return Err(DsmError::domain("small_inclusion_gradient_ratio", "need m >= 1 and nonzero radii"));
    }
    let den = bessel_i(m, k * z2.r)?;
    let radial = k * bessel_i_prime(m, k * z1.r)? / den;
    let angular = m as f64 / z1.r * bessel_i(m, k * z1.r)? / den;
    Ok(radial.hypot(angular))
}

/// Homogeneous solution with `du/dnu = influx` on the disk boundary.
pub fn homogeneous_solution(bg: &BackgroundMedium, influx: &Influx, x: ProbePoint) -> Result<Complex64> {
    let k = require_helmholtz(bg)?;
    let m = influx.mode as usize;
    let amp = bessel_i(m, k * x.r)? / (k * bessel_i_prime(m, k * bg.radius)?);
    Ok(influx.value(x.theta) * amp)
}

/// Factor taking a scattered trace driven by the Neumann influx `e^{im theta}`
/// to the normalization of [`analytic_transmission`].
pub fn neumann_to_incident_scale(m: usize, bg: &BackgroundMedium) -> Result<f64> {
    let k = require_helmholtz(bg)?;
    let z = k * bg.radius;
    Ok(k * bessel_i_prime(m, z)? / bessel_i(m, z)?)
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Result<[f64; 3]> {
    for c in 0..3 {
        let p = (c..3)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .expect("non-empty range");
        if a[p][c] == 0.0 {
            return Err(DsmError::domain("bounded_transmission", "singular transmission system"));
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..3 {
            let f = a[r][c] / a[c][c];
            for j in c..3 {
                a[r][j] -= f * a[c][j];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = [0.0; 3];
    for c in (0..3).rev() {
        let s: f64 = (c + 1..3).map(|j| a[c][j] * x[j]).sum();
        x[c] = (b[c] - s) / a[c][c];
    }
    Ok(x)
}

/// Exact scattered boundary coefficient of mode `m` on the bounded disk:
/// the Neumann influx `e^{im theta}` on a disk with a centred inclusion of
/// radius `ri` scatters to `c e^{im theta}` on the boundary.
pub fn bounded_transmission(m: usize, bg: &BackgroundMedium, ri: f64, kind: InclusionKind) -> Result<f64> {
    let k = require_helmholtz(bg)?;
    check_inclusion_radius(bg, ri)?;
    let (kin, s_in) = interior(bg, kind)?;
    let big_r = bg.radius;
    let di_outer = bessel_i_prime(m, k * big_r)?;
    let (i_in, di_in) = (bessel_i(m, kin * ri)?, bessel_i_prime(m, kin * ri)?);
    let (i_ri, di_ri) = (bessel_i(m, k * ri)?, bessel_i_prime(m, k * ri)?);
    let (k_ri, dk_ri) = (bessel_k(m, k * ri)?, bessel_k_prime(m, k * ri)?);
    let u0 = i_ri / (k * di_outer);
    let du0 = di_ri / di_outer;
    // Unknowns: interior amplitude, scattered I and K amplitudes.
    let sigma0 = bg.sigma0;
    let a = [
        [i_in, -i_ri, -k_ri],
        [s_in * kin * di_in, -sigma0 * k * di_ri, -sigma0 * k * dk_ri],
        [0.0, di_outer, bessel_k_prime(m, k * big_r)?],
    ];
    let [_, ai, bk] = solve3(a, [u0, sigma0 * du0, 0.0])?;
    Ok(ai * bessel_i(m, k * big_r)? + bk * bessel_k(m, k * big_r)?)
}

/// Boundary trace samples of the bounded-disk scattered field for `influx`.
pub fn bounded_transmission_trace(
    bg: &BackgroundMedium,
    ri: f64,
    kind: InclusionKind,
    influx: &Influx,
    angles: &[f64],
) -> Result<Vec<Complex64>> {
    let c = bounded_transmission(influx.mode as usize, bg, ri, kind)?;
    Ok(angles.iter().map(|&t| influx.value(t) * c).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve3_matches_known_solution() {
        let x = solve3([[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]], [7.0, 3.0, 6.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14 && (x[2] - 3.0).abs() < 1e-14);
    }
}
