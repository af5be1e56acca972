use dsm_core::boundary::{dft, sobolev_pair, sobolev_seminorm, BoundaryTrace, SobolevParams};
use dsm_core::probing::*;
use dsm_core::special::{bessel_i, bessel_i_prime, bessel_k, bessel_k_prime};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn bg10() -> BackgroundMedium {
    BackgroundMedium::with_ksq(10.0).unwrap()
}

fn bg0() -> BackgroundMedium {
    BackgroundMedium::with_ksq(0.0).unwrap()
}

fn max_norm(c: &dsm_core::FourierCoeffs) -> f64 {
    c.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max)
}

/// Neumann Green trace on the unit circle from the free-space kernel
/// `K_0(k|y - z|) / (2 pi)` plus the reflected part of its addition series.
fn green_trace_oracle(z: ProbePoint, theta: f64, k: f64) -> f64 {
    let y = [theta.cos(), theta.sin()];
    let dist = (y[0] - z.x()).hypot(y[1] - z.y());
    let mut v = bessel_k(0, k * dist).unwrap();
    for n in 0..80usize {
        let refl = bessel_i(n, k * z.r).unwrap() * bessel_k_prime(n, k).unwrap() * bessel_i(n, k).unwrap()
            / bessel_i_prime(n, k).unwrap();
        let mult = if n == 0 { 1.0 } else { 2.0 };
        v -= mult * refl * (n as f64 * (theta - z.theta)).cos();
    }
    v / (2.0 * PI)
}

#[test]
fn dft_of_green_trace_matches_modal_coefficients() {
    let bg = bg10();
    let z = ProbePoint::cartesian(0.5, 0.0);
    let trace = BoundaryTrace::from_fn(1.0, 256, |t| Complex64::new(green_trace_oracle(z, t, bg.k()), 0.0)).unwrap();
    let got = dft(&trace, 60).unwrap();
    let want = probe_coeffs(ProbeKind::Green, z, None, &bg, 60).unwrap().coeffs;
    for (n, w) in want.iter() {
        assert!((got.get(n) - w).norm() < 1e-8, "mode {n}: {} vs {}", got.get(n), w);
    }
}

#[test]
fn monopole_green_pairing_matches_series() {
    let bg = bg10();
    let k = bg.k();
    let x = ProbePoint::cartesian(0.3, 0.0);
    let z = ProbePoint::cartesian(0.5, 0.0);
    let zeta = probe_coeffs(ProbeKind::Monopole, x, None, &bg, 60).unwrap();
    let g = probe_coeffs(ProbeKind::Green, z, None, &bg, 60).unwrap();
    let got = sobolev_pair(&zeta.coeffs, &g.coeffs, SobolevParams::new(1.0).unwrap()).unwrap();
    let mut want = 0.0;
    for n in 1..=60usize {
        let lam = bessel_i(n, k).unwrap() / (k * bessel_i_prime(n, k).unwrap());
        let px = bessel_i(n, k * 0.3).unwrap() / bessel_i(n, k).unwrap();
        let pz = bessel_i(n, k * 0.5).unwrap() / bessel_i(n, k).unwrap();
        want += 2.0 * (n * n) as f64 / (2.0 * PI) * px * lam * pz;
    }
    assert!((got.re - want).abs() < 1e-8 * want && got.im.abs() < 1e-12 * want);
}

#[test]
fn monopole_seminorm_matches_series() {
    let bg = bg10();
    let k = bg.k();
    let x = ProbePoint::cartesian(0.4, 0.0);
    let zeta = probe_coeffs(ProbeKind::Monopole, x, None, &bg, 60).unwrap();
    let got = sobolev_seminorm(&zeta.coeffs, SobolevParams::new(1.0).unwrap()).unwrap();
    let want: f64 = (1..=60usize)
        .map(|n| (n * n) as f64 / PI * (bessel_i(n, k * 0.4).unwrap() / bessel_i(n, k).unwrap()).powi(2))
        .sum();
    assert!((got * got - want).abs() < 1e-8 * want);
    let s = seminorm(ProbeKind::Monopole, x, None, &bg, 1.0).unwrap();
    assert!((s * s - want).abs() < 1e-8 * want);
}

#[test]
fn eigenvalues_approach_static_values() {
    let bg = bg10();
    let mut last = f64::INFINITY;
    for n in 1..=60i64 {
        let lam = eigenvalue(n, &bg).unwrap();
        assert!(lam > 0.0);
        assert_eq!(lam, eigenvalue(-n, &bg).unwrap());
        let gap = (n as f64 * lam - 1.0).abs();
        if n >= 5 {
            assert!(gap < last);
            assert!(gap < bg.ksq / (n * n) as f64);
        }
        last = gap;
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let bg = bg10();
    let x = ProbePoint::polar(0.45, 1.1);
    let h = 1e-5;
    for n in [-7i64, -1, 0, 1, 2, 5, 12] {
        let g = grad_eigenfunction(n, x, &bg).unwrap();
        let f = |dx: f64, dy: f64| eigenfunction(n, ProbePoint::cartesian(x.x() + dx, x.y() + dy), &bg).unwrap();
        let fd = [(f(h, 0.0) - f(-h, 0.0)) / (2.0 * h), (f(0.0, h) - f(0.0, -h)) / (2.0 * h)];
        let scale = g[0].norm().max(g[1].norm());
        for i in 0..2 {
            assert!((g[i] - fd[i]).norm() <= 1e-6 * scale, "n = {n}, axis {i}: {} vs {}", g[i], fd[i]);
        }
    }
}

#[test]
fn monopole_at_origin_has_only_zero_mode() {
    let s = probe_coeffs(ProbeKind::Monopole, ProbePoint::polar(0.0, 0.0), None, &bg10(), 30).unwrap();
    for (n, c) in s.coeffs.iter() {
        if n == 0 {
            assert!(c.norm() > 0.0);
        } else {
            assert_eq!(c.norm(), 0.0);
        }
    }
    assert_eq!(seminorm(ProbeKind::Monopole, ProbePoint::polar(0.0, 0.0), None, &bg10(), 1.0).unwrap(), 0.0);
}

#[test]
fn static_pairing_matches_geometric_series() {
    let bg = bg0();
    let (r1, r2, th) = (0.45, 0.6, 0.8);
    let zeta = probe_coeffs(ProbeKind::Monopole, ProbePoint::polar(r1, th), None, &bg, 200).unwrap();
    let g = probe_coeffs(ProbeKind::Green, ProbePoint::polar(r2, th), None, &bg, 200).unwrap();
    let got = sobolev_pair(&zeta.coeffs, &g.coeffs, SobolevParams::new(1.0).unwrap()).unwrap();
    let c = r1 * r2;
    let want = c / (PI * (1.0 - c).powi(2));
    assert!((got.re - want).abs() < 1e-12 * want && got.im.abs() < 1e-12);
}

#[test]
fn grad_green_is_derivative_of_green() {
    let bg = bg10();
    let x = ProbePoint::cartesian(0.3, -0.25);
    let d = Direction::new(0.7);
    let v = d.vector();
    let h = 1e-5;
    let gg = probe_coeffs(ProbeKind::GradGreen, x, Some(d), &bg, 40).unwrap().coeffs;
    let plus = probe_coeffs(ProbeKind::Green, ProbePoint::cartesian(x.x() + h * v[0], x.y() + h * v[1]), None, &bg, 40)
        .unwrap()
        .coeffs;
    let minus = probe_coeffs(ProbeKind::Green, ProbePoint::cartesian(x.x() - h * v[0], x.y() - h * v[1]), None, &bg, 40)
        .unwrap()
        .coeffs;
    let scale = max_norm(&gg);
    for (n, c) in gg.iter() {
        let fd = (plus.get(n) - minus.get(n)) / (2.0 * h);
        assert!((c - fd).norm() < 1e-7 * scale, "mode {n}");
    }
}

fn sampled(n: usize, f: impl Fn(f64) -> Complex64) -> dsm_core::FourierCoeffs {
    dft(&BoundaryTrace::from_fn(1.0, n, f).unwrap(), 60).unwrap()
}

#[test]
fn zeta_pointwise_is_dual_to_coefficients() {
    let bg = bg10();
    let x = ProbePoint::cartesian(0.4, 0.7);
    let got = sampled(256, |t| zeta_pointwise(x, t, &bg, 100).unwrap());
    let want = probe_coeffs(ProbeKind::Monopole, x, None, &bg, 60).unwrap().coeffs;
    let scale = max_norm(&want);
    for (n, w) in want.iter() {
        assert!((got.get(n) - w).norm() < 1e-10 * scale, "mode {n}");
    }
}

#[test]
fn zeta_pointwise_special_cases() {
    let bg = bg10();
    let c = 1.0 / (2.0 * PI * bessel_i(0, bg.k()).unwrap());
    for t in [0.0, 1.0, 4.0] {
        let v = zeta_pointwise(ProbePoint::polar(0.0, 0.0), t, &bg, 40).unwrap();
        assert!((v.re - c).abs() < 1e-15 && v.im == 0.0);
        assert_eq!(zeta_pointwise(ProbePoint::polar(0.6, 0.0), t, &bg, 40).unwrap().im, 0.0);
    }
}

#[test]
fn eta_pointwise_is_dual_to_coefficients() {
    let bg = bg10();
    let x = ProbePoint::cartesian(0.5, 0.3);
    for (axis, alpha) in [(Axis::E1, -PI / 2.0), (Axis::E2, 0.0)] {
        let d = Direction::new(alpha);
        let got = sampled(256, |t| eta_pointwise(x, axis, t, &bg, 100).unwrap());
        let want = probe_coeffs(ProbeKind::Dipole, x, Some(d), &bg, 60).unwrap().coeffs;
        let scale = max_norm(&want);
        for (n, w) in want.iter() {
            assert!((got.get(n) - w).norm() < 1e-10 * scale, "{axis:?} mode {n}");
        }
    }
}

#[test]
fn eta_pointwise_on_the_axis() {
    let bg = bg10();
    let k = bg.k();
    let r = 0.55;
    let x = ProbePoint::polar(r, 0.0);
    for t in [0.0, 0.9, 2.2] {
        let mut want = 0.0;
        for n in -40i64..=40 {
            let a = n.unsigned_abs() as usize;
            want += k * bessel_i_prime(a, k * r).unwrap() / bessel_i(a, k).unwrap() * (n as f64 * t).cos();
        }
        let got = eta_pointwise(x, Axis::E1, t, &bg, 40).unwrap();
        assert!((got.re - want / (2.0 * PI)).abs() < 1e-12 * want.abs().max(1.0));
        assert!(got.im.abs() < 1e-12);
    }
}

#[test]
fn static_closed_form_examples() {
    let bg = bg0();
    assert_eq!(seminorm_closed_v0(ProbeKind::Green, ProbePoint::polar(0.0, 0.0), &bg).unwrap(), 0.0);
    let z = seminorm_closed_v0(ProbeKind::Monopole, ProbePoint::polar(0.5, 0.0), &bg).unwrap();
    assert!((z * z - 0.25 * 1.25 / (PI * 0.421875)).abs() < 1e-15);
    let series = seminorm(ProbeKind::Monopole, ProbePoint::polar(0.5, 0.0), None, &bg, 1.0).unwrap();
    assert!((series * series - z * z).abs() < 1e-10 * z * z);
    assert!(seminorm_closed_v0(ProbeKind::Green, ProbePoint::polar(0.5, 0.0), &bg10()).is_err());
}

fn rotate(s: &ProbeSpectrum, beta: f64) -> Vec<Complex64> {
    s.coeffs
        .iter()
        .map(|(n, c)| c * Complex64::from_polar(1.0, -(n as f64) * beta))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dipole_linearity(r in 0.05f64..0.9, th in -PI..PI, alpha in -PI..PI, t in 0.0f64..std::f64::consts::TAU) {
        let bg = bg10();
        let x = ProbePoint::polar(r, th);
        let d = Direction::new(alpha);
        let v = d.vector();
        let direct = probe_coeffs(ProbeKind::Dipole, x, Some(d), &bg, 60).unwrap().coeffs.evaluate(t);
        let e1 = eta_pointwise(x, Axis::E1, t, &bg, 60).unwrap();
        let e2 = eta_pointwise(x, Axis::E2, t, &bg, 60).unwrap();
        let combo = e1 * v[0] + e2 * v[1];
        prop_assert!((direct - combo).norm() < 1e-12 * (1.0 + direct.norm()));
    }

    #[test]
    fn static_seminorms_match_closed_forms(r in 0.0f64..0.85, th in -PI..PI, alpha in -PI..PI) {
        let bg = bg0();
        let x = ProbePoint::polar(r, th);
        let d = Some(Direction::new(alpha));
        for kind in [ProbeKind::Monopole, ProbeKind::Dipole, ProbeKind::Green, ProbeKind::GradGreen] {
            let closed = seminorm_closed_v0(kind, x, &bg).unwrap();
            let series = seminorm(kind, x, d, &bg, 1.0).unwrap();
            let spectral = sobolev_seminorm(&probe_coeffs(kind, x, d, &bg, 200).unwrap().coeffs, SobolevParams::new(1.0).unwrap()).unwrap();
            prop_assert!((series - closed).abs() <= 1e-8 * closed.max(1e-300), "{:?}: {} vs {}", kind, series, closed);
            prop_assert!((spectral - closed).abs() <= 1e-8 * closed.max(1e-300));
        }
    }

    #[test]
    fn rotation_equivariance(r in 0.0f64..0.9, th in -PI..PI, alpha in -PI..PI, beta in -PI..PI) {
        let bg = bg10();
        for kind in [ProbeKind::Monopole, ProbeKind::Dipole, ProbeKind::Green, ProbeKind::GradGreen] {
            let a = probe_coeffs(kind, ProbePoint::polar(r, th), Some(Direction::new(alpha)), &bg, 40).unwrap();
            let b = probe_coeffs(kind, ProbePoint::polar(r, th + beta), Some(Direction::new(alpha + beta)), &bg, 40).unwrap();
            let rotated = rotate(&a, beta);
            for ((_, got), want) in b.coeffs.iter().zip(rotated) {
                prop_assert!((got - want).norm() <= 1e-12 * (1.0 + want.norm()));
            }
            let na = seminorm(kind, a.source, a.direction, &bg, 1.0).unwrap();
            let nb = seminorm(kind, b.source, b.direction, &bg, 1.0).unwrap();
            prop_assert!((na - nb).abs() <= 1e-12 * (1.0 + na));
        }
    }

    #[test]
    fn dipole_seminorm_ignores_direction_when_static(r in 0.0f64..0.9, a1 in -PI..PI, a2 in -PI..PI) {
        let bg = bg0();
        let x = ProbePoint::polar(r, 0.3);
        let s1 = seminorm(ProbeKind::Dipole, x, Some(Direction::new(a1)), &bg, 1.0).unwrap();
        let s2 = seminorm(ProbeKind::Dipole, x, Some(Direction::new(a2)), &bg, 1.0).unwrap();
        prop_assert!((s1 - s2).abs() <= 1e-10 * s1);
    }
}
