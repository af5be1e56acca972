//! Modified Bessel functions `I_n`, `K_n` of integer order, `I_{n+1/2}` of
//! half-integer order, and Legendre polynomials.
//!
//! `I` is evaluated from its power series while `z <= 100` (all terms are
//! positive, so the sum is free of cancellation) and above that from the
//! backward ratio recurrence normalized by the Hankel expansion of `I_0`.
//! `K_0` and `K_1` come from a trapezoidal rule on the integral
//! `K_v(z) = int_0^inf exp(-z cosh t) cosh(v t) dt` for `z <= 30` and from
//! the Hankel expansion above; higher orders use the stable upward recurrence.

use crate::error::{DsmError, Result};
use std::f64::consts::PI;

/// Largest integer order accepted by the public evaluators.
pub const MAX_ORDER: usize = 200;

/// Ratio tables may reach two orders past [`MAX_ORDER`] so that derivative
/// neighbours `n +- 1` are available for every admissible `n`.
pub const MAX_TABLE_ORDER: usize = MAX_ORDER + 2;

const SERIES_LIMIT: f64 = 100.0;
const K_QUADRATURE_LIMIT: f64 = 30.0;
const K_STEP: f64 = 1.0 / 16.0;

fn check_arg(func: &'static str, z: f64) -> Result<()> {
    if !(z >= 0.0) || !z.is_finite() {
        return Err(DsmError::domain(func, format!("z = {z} must be finite and >= 0")));
    }
    Ok(())
}

fn check_positive(func: &'static str, z: f64) -> Result<()> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(DsmError::domain(func, format!("z = {z} must be finite and > 0")));
    }
    Ok(())
}

fn check_order(n: usize, max: usize) -> Result<()> {
    if n > max {
        return Err(DsmError::OrderTooLarge { order: n, max });
    }
    Ok(())
}

/// Order `v = n + frac` with `frac` in {0, 1/2}.
#[derive(Clone, Copy, Debug)]
enum Family {
    Integer,
    Half,
}

impl Family {
    fn frac(self) -> f64 {
        match self {
            Family::Integer => 0.0,
            Family::Half => 0.5,
        }
    }
}

/// `sum_m (z^2/4)^m / (m! (v+1)_m)`, the power series of `I_v` without its
/// leading factor.
fn series_sum(nu: f64, z: f64) -> f64 {
    let q = 0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= q / (m * (nu + m));
        sum += term;
        if term <= sum * 1e-17 {
            return sum;
        }
    }
}

/// `(z/2)^v / Gamma(v+1)` as a running product. When `z/2 < 1` the partial
/// products decrease monotonically, otherwise they peak near `e^{z/2}`, so
/// nothing overflows or underflows before the final value does.
fn series_prefactor(family: Family, n: usize, z: f64) -> f64 {
    let half = 0.5 * z;
    let (mut p, offset) = match family {
        Family::Integer => (1.0, 0.0),
        Family::Half => (half.sqrt() / (0.5 * PI.sqrt()), 0.5),
    };
    for j in 1..=n {
        p *= half / (j as f64 + offset);
    }
    p
}

fn i_series(family: Family, n: usize, z: f64) -> f64 {
    if z == 0.0 {
        return match family {
            Family::Integer if n == 0 => 1.0,
            _ => 0.0,
        };
    }
    series_prefactor(family, n, z) * series_sum(n as f64 + family.frac(), z)
}

/// Hankel expansion of `e^{-z} I_v(z)` for large `z`.
fn i_scaled_asymptotic(nu: f64, z: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        let next = -term * (mu - (2.0 * kf - 1.0).powi(2)) / (8.0 * kf * z);
        if next.abs() >= term.abs() && k > 1 {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * z).sqrt()
}

/// Hankel expansion of `e^{z} K_v(z)` for large `z`.
fn k_scaled_asymptotic(nu: f64, z: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        let next = term * (mu - (2.0 * kf - 1.0).powi(2)) / (8.0 * kf * z);
        if next.abs() >= term.abs() && k > 1 {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum * (PI / (2.0 * z)).sqrt()
}

/// `e^{z} K_v(z)` for `v` in {0, 1} by the trapezoidal rule, which converges
/// geometrically for this analytic, rapidly decaying integrand.
fn k_scaled_quadrature(nu: f64, z: f64) -> f64 {
    let mut sum = 0.5;
    let mut j = 1usize;
    loop {
        let t = j as f64 * K_STEP;
        let term = (-z * (t.cosh() - 1.0)).exp() * (nu * t).cosh();
        sum += term;
        if term < 1e-18 * sum && z * t.sinh() > nu {
            break;
        }
        j += 1;
    }
    sum * K_STEP
}

fn k01_scaled(z: f64) -> (f64, f64) {
    if z <= K_QUADRATURE_LIMIT {
        (k_scaled_quadrature(0.0, z), k_scaled_quadrature(1.0, z))
    } else {
        (k_scaled_asymptotic(0.0, z), k_scaled_asymptotic(1.0, z))
    }
}

/// Ratios `q_j = I_{v_j + 1}(z) / I_{v_j}(z)`, `v_j = j + frac`, for
/// `j = 0..=nmax`, from the backward recurrence `q_{j-1} = 1/(2 v_j / z + q_j)`
/// started well above both `nmax` and `z`.
fn order_ratios_impl(family: Family, nmax: usize, z: f64) -> Vec<f64> {
    let mut q = vec![0.0; nmax + 1];
    if z == 0.0 {
        return q;
    }
    let frac = family.frac();
    let top = nmax + 40 + z.ceil() as usize;
    let nu_top = top as f64 + frac + 1.0;
    let mut cur = z / (nu_top + (nu_top * nu_top + z * z).sqrt());
    for j in (1..=top).rev() {
        let nu = j as f64 + frac;
        if j <= nmax {
            q[j] = cur;
        }
        cur = 1.0 / (2.0 * nu / z + cur);
    }
    q[0] = cur;
    q
}

fn i_scaled_impl(family: Family, n: usize, z: f64) -> f64 {
    if z <= SERIES_LIMIT {
        return i_series(family, n, z) * (-z).exp();
    }
    let base = match family {
        Family::Integer => i_scaled_asymptotic(0.0, z),
        Family::Half => (1.0 - (-2.0 * z).exp()) / (2.0 * PI * z).sqrt(),
    };
    let q = order_ratios_impl(family, n, z);
    q[..n].iter().fold(base, |acc, r| acc * r)
}

fn i_value(family: Family, func: &'static str, n: usize, z: f64) -> Result<f64> {
    if z <= SERIES_LIMIT {
        return Ok(i_series(family, n, z));
    }
    let v = i_scaled_impl(family, n, z) * z.exp();
    if !v.is_finite() {
        return Err(DsmError::Overflow { func, order: n, z });
    }
    Ok(v)
}

/// Modified Bessel function of the first kind, `I_n(z)`.
pub fn bessel_i(n: usize, z: f64) -> Result<f64> {
    check_arg("bessel_i", z)?;
    check_order(n, MAX_TABLE_ORDER)?;
    i_value(Family::Integer, "bessel_i", n, z)
}

/// Exponentially scaled `e^{-z} I_n(z)`.
pub fn bessel_i_scaled(n: usize, z: f64) -> Result<f64> {
    check_arg("bessel_i_scaled", z)?;
    check_order(n, MAX_TABLE_ORDER)?;
    Ok(i_scaled_impl(Family::Integer, n, z))
}

/// Exponentially scaled `e^{z} K_n(z)`.
pub fn bessel_k_scaled(n: usize, z: f64) -> Result<f64> {
    check_positive("bessel_k_scaled", z)?;
    check_order(n, MAX_TABLE_ORDER)?;
    let (k0, k1) = k01_scaled(z);
    if n == 0 {
        return Ok(k0);
    }
    let (mut prev, mut cur) = (k0, k1);
    for j in 1..n {
        let next = prev + 2.0 * j as f64 / z * cur;
        prev = cur;
        cur = next;
        if !cur.is_finite() {
            return Err(DsmError::Overflow {
                func: "bessel_k",
                order: n,
                z,
            });
        }
    }
    Ok(cur)
}

/// Modified Bessel function of the second kind, `K_n(z)`.
pub fn bessel_k(n: usize, z: f64) -> Result<f64> {
    let v = bessel_k_scaled(n, z)? * (-z).exp();
    if !v.is_finite() {
        return Err(DsmError::Overflow {
            func: "bessel_k",
            order: n,
            z,
        });
    }
    Ok(v)
}

/// `I_n'(z) = (I_{n-1}(z) + I_{n+1}(z)) / 2`, with `I_0' = I_1`.
pub fn bessel_i_prime(n: usize, z: f64) -> Result<f64> {
    check_order(n, MAX_ORDER)?;
    if n == 0 {
        return bessel_i(1, z);
    }
    Ok(0.5 * (bessel_i(n - 1, z)? + bessel_i(n + 1, z)?))
}

/// `K_n'(z) = -(K_{n-1}(z) + K_{n+1}(z)) / 2`, with `K_0' = -K_1`.
pub fn bessel_k_prime(n: usize, z: f64) -> Result<f64> {
    check_order(n, MAX_ORDER)?;
    if n == 0 {
        return Ok(-bessel_k(1, z)?);
    }
    Ok(-0.5 * (bessel_k(n - 1, z)? + bessel_k(n + 1, z)?))
}

/// `I_{n+1/2}(z)` for `z > 0`.
pub fn bessel_i_half(n: usize, z: f64) -> Result<f64> {
    check_positive("bessel_i_half", z)?;
    check_order(n, MAX_TABLE_ORDER)?;
    i_value(Family::Half, "bessel_i_half", n, z)
}

/// Legendre polynomial `P_n(t)` by the three-term recurrence.
pub fn legendre_p(n: usize, t: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&t) {
        return Err(DsmError::domain("legendre_p", format!("t = {t} outside [-1, 1]")));
    }
    if n == 0 {
        return Ok(1.0);
    }
    let (mut prev, mut cur) = (1.0, t);
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0) * t * cur - jf * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `q_n = I_{n+1}(z) / I_n(z)` for `n = 0..=nmax`.
pub fn bessel_i_order_ratios(nmax: usize, z: f64) -> Result<Vec<f64>> {
    check_arg("bessel_i_order_ratios", z)?;
    check_order(nmax, MAX_TABLE_ORDER)?;
    Ok(order_ratios_impl(Family::Integer, nmax, z))
}

/// `I_{n+3/2}(z) / I_{n+1/2}(z)` for `n = 0..=nmax`.
pub fn bessel_i_half_order_ratios(nmax: usize, z: f64) -> Result<Vec<f64>> {
    check_positive("bessel_i_half_order_ratios", z)?;
    check_order(nmax, MAX_TABLE_ORDER)?;
    Ok(order_ratios_impl(Family::Half, nmax, z))
}

fn ratios_impl(family: Family, func: &'static str, nmax: usize, a: f64, b: f64) -> Result<Vec<f64>> {
    check_arg(func, a)?;
    check_positive(func, b)?;
    check_order(nmax, MAX_TABLE_ORDER)?;
    if a > b {
        return Err(DsmError::domain(func, format!("numerator argument {a} exceeds {b}")));
    }
    let base = if b <= SERIES_LIMIT {
        i_series(family, 0, a) / i_series(family, 0, b)
    } else {
        (a - b).exp() * i_scaled_impl(family, 0, a) / i_scaled_impl(family, 0, b)
    };
    let qa = order_ratios_impl(family, nmax, a);
    let qb = order_ratios_impl(family, nmax, b);
    let mut out = Vec::with_capacity(nmax + 1);
    let mut t = base;
    out.push(t);
    for j in 0..nmax {
        t *= qa[j] / qb[j];
        out.push(t);
    }
    Ok(out)
}

/// `I_n(a) / I_n(b)` for `n = 0..=nmax` and `0 <= a <= b`.
///
/// The ratio is built from per-order ratios so it stays finite (and
/// underflows gracefully) where the two factors would overflow separately.
pub fn bessel_i_ratios(nmax: usize, a: f64, b: f64) -> Result<Vec<f64>> {
    ratios_impl(Family::Integer, "bessel_i_ratios", nmax, a, b)
}

/// `I_{n+1/2}(a) / I_{n+1/2}(b)` for `n = 0..=nmax` and `0 <= a <= b`.
pub fn bessel_i_half_ratios(nmax: usize, a: f64, b: f64) -> Result<Vec<f64>> {
    ratios_impl(Family::Half, "bessel_i_half_ratios", nmax, a, b)
}

/// Single ratio `I_n(a) / I_n(b)`.
pub fn bessel_i_ratio(n: usize, a: f64, b: f64) -> Result<f64> {
    Ok(bessel_i_ratios(n, a, b)?[n])
}
