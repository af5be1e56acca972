use crate::boundary::{BoundaryTrace, FourierCoeffs};
use crate::error::{DsmError, Result};
use crate::probing::{probe_coeffs, BackgroundMedium, Direction, ProbeKind, ProbePoint};
use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Monopole {
    pub location: ProbePoint,
    pub weight: Complex64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dipole {
    pub location: ProbePoint,
    pub weight: Complex64,
    pub direction: Direction,
}

/// Weighted Green functions and Green gradients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointSourceConfig {
    pub monopoles: Vec<Monopole>,
    pub dipoles: Vec<Dipole>,
}

/// Fourier coefficients of `sum c_j G_{q_j} + sum a_i d_i . grad G_{p_i}`.
pub fn point_source_coeffs(cfg: &PointSourceConfig, bg: &BackgroundMedium, max_mode: usize) -> Result<FourierCoeffs> {
    let mut total = FourierCoeffs::zeros(bg.radius, max_mode);
    for m in &cfg.monopoles {
        m.location.check_interior(bg)?;
        let s = probe_coeffs(ProbeKind::Green, m.location, None, bg, max_mode)?;
        total.add_scaled(&s.coeffs, m.weight)?;
    }
    for d in &cfg.dipoles {
        d.location.check_interior(bg)?;
        let s = probe_coeffs(ProbeKind::GradGreen, d.location, Some(d.direction), bg, max_mode)?;
        total.add_scaled(&s.coeffs, d.weight)?;
    }
    Ok(total)
}

/// Boundary samples of the point-source field at `n` uniform angles.
pub fn point_source_trace(
    cfg: &PointSourceConfig,
    bg: &BackgroundMedium,
    n: usize,
    max_mode: usize,
) -> Result<BoundaryTrace> {
    if n < 2 * max_mode + 2 {
        log::debug!("point_source_trace: {n} samples under-resolve mode {max_mode}");
    }
    if n == 0 {
        return Err(DsmError::domain("point_source_trace", "need at least one sample"));
    }
    point_source_coeffs(cfg, bg, max_mode)?.synthesize(n)
}
