use dsm_core::kernels::*;
use dsm_core::*;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn static_ctx() -> KernelContext {
    KernelContext::new(&BackgroundMedium::with_ksq(0.0).unwrap(), &KernelParams::default()).unwrap()
}

fn radial(theta: f64) -> ScanGrid {
    ScanGrid::Radial { theta, r_min: 0.0, r_max: 0.95, count: 96 }
}

fn k1_argmax(ctx: &KernelContext, r: f64) -> f64 {
    argmax_scan(Kernel::K1, ProbePoint::polar(r, 0.7), None, None, &radial(0.7), ctx)
        .unwrap()
        .location
        .r
}

fn k4_argmax(ctx: &KernelContext, r: f64) -> f64 {
    let d = Direction::new(1.3);
    argmax_scan(
        Kernel::K4,
        ProbePoint::polar(r, 0.7),
        Some(d),
        Some(DirectionRule::Fixed(d)),
        &radial(0.7),
        ctx,
    )
    .unwrap()
    .location
    .r
}

#[test]
fn k1_static_argmax_matches_published_values() {
    let ctx = static_ctx();
    assert!((k1_argmax(&ctx, 0.4) - 0.342).abs() < 0.01);
    assert!((k1_argmax(&ctx, 0.7) - 0.666).abs() < 0.01);
}

#[test]
fn k4_static_argmax_matches_published_values() {
    let ctx = static_ctx();
    assert!((k4_argmax(&ctx, 0.4) - 0.386).abs() < 0.01);
    assert!((k4_argmax(&ctx, 0.6) - 0.598).abs() < 0.01);
}

#[test]
fn argmax_tracks_the_identity_line() {
    // Bounds follow the published maxima: K1 sits 0.058 below r at 0.4, K4 0.014.
    let ctx = static_ctx();
    let (mut prev1, mut prev4) = (0.0, 0.0);
    for i in 0..=6 {
        let r = 0.2 + 0.1 * i as f64;
        let (a1, a4) = (k1_argmax(&ctx, r), k4_argmax(&ctx, r));
        assert!(a1 > prev1 && a4 > prev4, "argmax not increasing at {r}");
        assert!((a1 - r).abs() < 0.06, "K1 at {r}: {a1}");
        assert!((a4 - r).abs() < 0.03, "K4 at {r}: {a4}");
        prev1 = a1;
        prev4 = a4;
    }
}

#[test]
fn k1_closed_form_example() {
    let x = ProbePoint::polar(0.5, 0.3);
    let v = k1_numerator_closed_v0(x, x).unwrap();
    assert!((v - 0.25 / (PI * 0.5625)).abs() < 1e-14);
    let ctx = static_ctx();
    let q = KernelQuery { x, z: x, dx: None, dz: None };
    let modal = ctx.numerator(Kernel::K1, &q).unwrap();
    assert!((modal.re - v).abs() < 1e-10 && modal.im.abs() < 1e-12);
    assert!(k1_numerator_closed_v0(ProbePoint::polar(1e-9, 0.0), x).unwrap().abs() < 1e-8);
}

#[test]
fn closed_forms_reject_boundary_products() {
    let b = ProbePoint::polar(1.0, 0.0);
    assert!(k1_numerator_closed_v0(b, b).is_err());
    let d = Direction::new(0.0);
    assert!(k4_numerator_closed_v0(b, b, d, d).is_err());
}

#[test]
fn k1_numerator_peaks_at_equal_angles() {
    let a = k1_numerator_closed_v0(ProbePoint::polar(0.6, 0.2), ProbePoint::polar(0.6, 0.2)).unwrap();
    for dt in [0.05, 0.5, 2.0, PI] {
        let b = k1_numerator_closed_v0(ProbePoint::polar(0.6, 0.2 + dt), ProbePoint::polar(0.6, 0.2)).unwrap();
        assert!(b < a);
    }
}

#[test]
fn k4_numerator_bound_and_equality() {
    let (r1, r2): (f64, f64) = (0.55, 0.7);
    let c = r1 * r2;
    let bound = (c * c + 4.0 * c + 1.0) / (PI * (1.0 - c).powi(4));
    let x = ProbePoint::polar(r1, 1.0);
    let eq = k4_numerator_closed_v0(x, ProbePoint::polar(r2, 1.0), Direction::new(0.4), Direction::new(0.4 + PI)).unwrap();
    assert!((eq.abs() - bound).abs() < 1e-12 * bound);
    for (t, a) in [(1.3, 0.4), (0.2, 2.0), (3.0, 0.1)] {
        let v = k4_numerator_closed_v0(x, ProbePoint::polar(r2, t), Direction::new(0.4), Direction::new(a)).unwrap();
        assert!(v.abs() <= bound);
    }
}

#[test]
fn k2_k3_vanish_in_aligned_configurations() {
    let ctx = static_ctx();
    let (x, z) = (ProbePoint::polar(0.5, 0.9), ProbePoint::polar(0.3, 0.9));
    let q2 = KernelQuery { x, z, dx: None, dz: Some(Direction::new(0.9)) };
    assert!(ctx.numerator(Kernel::K2, &q2).unwrap().norm() < 1e-12);
    let q3 = KernelQuery { x, z, dx: Some(Direction::new(0.9)), dz: None };
    assert!(ctx.numerator(Kernel::K3, &q3).unwrap().norm() < 1e-12);
    // Off alignment both are nonzero.
    let q2 = KernelQuery { dz: Some(Direction::new(0.9 + PI / 2.0)), ..q2 };
    assert!(ctx.numerator(Kernel::K2, &q2).unwrap().norm() > 1e-3);
}

#[test]
fn k2_peak_is_below_k1_peak() {
    // Monopole source scaled by 6 at (0.6, 0.45); tangential dipole source at (0.45, -0.6).
    let ctx = static_ctx();
    let g = ScanGrid::Cartesian { spacing: 0.05, max_radius: 0.95 };
    let z1 = ProbePoint::cartesian(0.6, 0.45);
    let z2 = ProbePoint::cartesian(0.45, -0.6);
    let p1 = 6.0 * argmax_scan(Kernel::K1, z1, None, None, &g, &ctx).unwrap().value;
    let src = ctx.source(Kernel::K2, z2, Some(Direction::new(z2.theta))).unwrap();
    let p2 = argmax_of(|x| ctx.eval_with(Kernel::K2, x, None, &src).unwrap(), &g).unwrap().value;
    assert!(p2 < p1, "K2 peak {p2} vs K1 peak {p1}");
}

#[test]
fn k4_prefers_parallel_directions() {
    for ksq in [0.0, 10.0] {
        let bg = BackgroundMedium::with_ksq(ksq).unwrap();
        let p = KernelParams::default();
        let x = ProbePoint::polar(0.5, 0.4);
        let par = k4(&KernelQuery { x, z: x, dx: Some(Direction::new(1.0)), dz: Some(Direction::new(1.0)) }, &p, &bg).unwrap();
        let perp = k4(&KernelQuery { x, z: x, dx: Some(Direction::new(1.0)), dz: Some(Direction::new(1.0 + PI / 2.0)) }, &p, &bg).unwrap();
        assert!(perp < par, "k^2 = {ksq}: {perp} >= {par}");
    }
}

#[test]
fn missing_directions_are_errors() {
    let bg = BackgroundMedium::with_ksq(1.0).unwrap();
    let x = ProbePoint::polar(0.3, 0.0);
    let q = KernelQuery { x, z: x, dx: None, dz: None };
    let p = KernelParams::default();
    assert!(k2(&q, &p, &bg).is_err());
    assert!(k3(&q, &p, &bg).is_err());
    assert!(k4(&q, &p, &bg).is_err());
    assert!(k1(&q, &p, &bg).is_ok());
}

#[test]
fn origin_clamp_keeps_monopole_kernels_finite() {
    let bg = BackgroundMedium::with_ksq(0.0).unwrap();
    let p = KernelParams::default();
    let q = KernelQuery { x: ProbePoint::polar(0.0, 0.0), z: ProbePoint::polar(0.5, 0.0), dx: None, dz: None };
    let v = k1(&q, &p, &bg).unwrap();
    assert!(v.is_finite() && v >= 0.0);
    let ctx = KernelContext::new(&bg, &p).unwrap();
    let inner = ctx.denominator(ProbeKind::Monopole, ProbePoint::polar(0.05, 1.0), None).unwrap();
    let at_eta = ctx.denominator(ProbeKind::Monopole, ProbePoint::polar(0.1, 1.0), None).unwrap();
    assert!((inner - at_eta).abs() < 1e-14 * at_eta);
}

#[test]
fn kernels_are_positive_at_the_diagonal_for_helmholtz() {
    let bg = BackgroundMedium::with_ksq(10.0).unwrap();
    let p = KernelParams::default();
    let x = ProbePoint::polar(0.45, 2.0);
    let d = Some(Direction::new(0.3));
    for k in [k1, k2, k3, k4] {
        let v = k(&KernelQuery { x, z: x, dx: d, dz: d }, &p, &bg).unwrap();
        assert!(v.is_finite() && v >= 0.0);
    }
}

fn rotate(v: [f64; 3], axis: [f64; 3], angle: f64) -> [f64; 3] {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let k = [axis[0] / n, axis[1] / n, axis[2] / n];
    let (s, c) = angle.sin_cos();
    let dot = k[0] * v[0] + k[1] * v[1] + k[2] * v[2];
    let cross = [k[1] * v[2] - k[2] * v[1], k[2] * v[0] - k[0] * v[2], k[0] * v[1] - k[1] * v[0]];
    [0, 1, 2].map(|i| v[i] * c + cross[i] * s + k[i] * dot * (1.0 - c))
}

#[test]
fn sphere_numerator_is_symmetric() {
    let ctx = SphereContext::new(&BackgroundMedium::with_ksq(10.0).unwrap(), &KernelParams::default()).unwrap();
    let (x, z) = ([0.1, -0.3, 0.2], [0.4, 0.1, -0.05]);
    let (a, b) = (ctx.numerator(x, z).unwrap(), ctx.numerator(z, x).unwrap());
    assert!((a - b).abs() < 1e-13 * a.abs());
}

#[test]
fn sphere_inputs_are_validated() {
    let p = KernelParams::default();
    assert!(k1_3d([1.0, 0.0, 0.0], [0.1, 0.0, 0.0], &p, &BackgroundMedium::with_ksq(1.0).unwrap()).is_err());
    assert!(SphereContext::new(&BackgroundMedium::with_ksq(0.0).unwrap(), &p).is_err());
    let g2 = KernelParams { gamma: 2.0, ..p };
    assert!(SphereContext::new(&BackgroundMedium::with_ksq(1.0).unwrap(), &g2).is_err());
}

#[test]
fn sphere_green_seminorm_matches_zero_mode_free_h1_sum_at_small_k() {
    // As k -> 0, |zeta_x|^2 tends to sum n(n+1)(2n+1) r^{2n} / (4 pi), the H^1 seminorm of the
    // Poisson kernel of the ball.
    let ctx = SphereContext::new(&BackgroundMedium::with_ksq(1e-10).unwrap(), &KernelParams::default()).unwrap();
    let r: f64 = 0.5;
    let (zs, _) = ctx.seminorms_sq(r).unwrap();
    let oracle: f64 = (1..200).map(|n| {
        let n = n as f64;
        n * (n + 1.0) * (2.0 * n + 1.0) * r.powf(2.0 * n) / (4.0 * PI)
    }).sum();
    assert!((zs - oracle).abs() < 1e-8 * oracle);
}

#[test]
fn sphere_scan_peaks_near_the_fixed_point() {
    let ctx = SphereContext::new(&BackgroundMedium::with_ksq(10.0).unwrap(), &KernelParams::default()).unwrap();
    let x = [0.114, 0.114, 0.396];
    let (loc, _, field) = argmax_scan_3d(x, 0.1, 0.9, &ctx).unwrap();
    assert!(!field.is_empty());
    let d = ((loc[0] - x[0]).powi(2) + (loc[1] - x[1]).powi(2) + (loc[2] - x[2]).powi(2)).sqrt();
    assert!(d < 0.05, "peak at {loc:?}, {d} from x");
}

fn modal_k4_static(x: ProbePoint, z: ProbePoint, dx: Direction, dz: Direction) -> f64 {
    // Independent modal oracle: sum_n n^3 (r1 r2)^{n-1} cos((n-1)(theta_z - theta_x) + alpha_z - alpha_x) / pi.
    (1..=400)
        .map(|n| {
            let n = n as f64;
            n.powi(3) * (x.r * z.r).powf(n - 1.0) * ((n - 1.0) * (z.theta - x.theta) + dz.alpha - dx.alpha).cos() / PI
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn k1_closed_matches_modal(r1 in 0.0f64..0.9, r2 in 0.0f64..0.9, t1 in -PI..PI, t2 in -PI..PI) {
        let ctx = static_ctx();
        let (x, z) = (ProbePoint::polar(r1, t1), ProbePoint::polar(r2, t2));
        let closed = k1_numerator_closed_v0(x, z).unwrap();
        let modal = ctx.numerator(Kernel::K1, &KernelQuery { x, z, dx: None, dz: None }).unwrap();
        prop_assert!((modal - Complex64::new(closed, 0.0)).norm() < 1e-9 * (1.0 + closed.abs()));
    }

    #[test]
    fn k4_closed_matches_modal(
        r1 in 0.0f64..0.85, r2 in 0.0f64..0.85, t1 in -PI..PI, t2 in -PI..PI, a1 in -PI..PI, a2 in -PI..PI,
    ) {
        let ctx = static_ctx();
        let (x, z) = (ProbePoint::polar(r1, t1), ProbePoint::polar(r2, t2));
        let (dx, dz) = (Direction::new(a1), Direction::new(a2));
        let closed = k4_numerator_closed_v0(x, z, dx, dz).unwrap();
        let oracle = modal_k4_static(x, z, dx, dz);
        prop_assert!((closed - oracle).abs() < 1e-9 * (1.0 + oracle.abs()));
        let modal = ctx.numerator(Kernel::K4, &KernelQuery { x, z, dx: Some(dx), dz: Some(dz) }).unwrap();
        prop_assert!((modal - Complex64::new(closed, 0.0)).norm() < 1e-9 * (1.0 + closed.abs()));
    }

    #[test]
    fn sphere_numerator_is_rotation_invariant(
        x in proptest::array::uniform3(-0.5f64..0.5), z in proptest::array::uniform3(-0.5f64..0.5),
        axis in proptest::array::uniform3(0.1f64..1.0), angle in -PI..PI,
    ) {
        let ctx = SphereContext::new(&BackgroundMedium::with_ksq(5.0).unwrap(), &KernelParams::default()).unwrap();
        let a = ctx.numerator(x, z).unwrap();
        let b = ctx.numerator(rotate(x, axis, angle), rotate(z, axis, angle)).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn kernel_values_are_rotation_invariant(r1 in 0.05f64..0.9, r2 in 0.05f64..0.9, t in -PI..PI, s in -PI..PI, a in -PI..PI) {
        let bg = BackgroundMedium::with_ksq(4.0).unwrap();
        let ctx = KernelContext::new(&bg, &KernelParams::default()).unwrap();
        let q = KernelQuery {
            x: ProbePoint::polar(r1, t), z: ProbePoint::polar(r2, 0.3),
            dx: Some(Direction::new(a)), dz: Some(Direction::new(-a)),
        };
        let r = KernelQuery {
            x: ProbePoint::polar(r1, t + s), z: ProbePoint::polar(r2, 0.3 + s),
            dx: Some(Direction::new(a + s)), dz: Some(Direction::new(-a + s)),
        };
        for k in [Kernel::K1, Kernel::K2, Kernel::K3, Kernel::K4] {
            let (u, v) = (ctx.eval(k, &q).unwrap(), ctx.eval(k, &r).unwrap());
            prop_assert!((u - v).abs() <= 1e-9 * (1.0 + u));
        }
    }
}
