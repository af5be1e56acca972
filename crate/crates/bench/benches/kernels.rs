use criterion::{criterion_group, criterion_main, Criterion};
use dsm_core::forward::{point_source_trace, Monopole, PointSourceConfig};
use dsm_core::kernels::{argmax_scan, DirectionRule, Kernel, KernelContext, KernelParams, KernelQuery, ScanGrid};
use dsm_core::reconstruction::{IndexPlan, SamplingGrid};
use dsm_core::{BackgroundMedium, Direction, ProbePoint};
use num_complex::Complex64;
use std::hint::black_box;

fn kernels(c: &mut Criterion) {
    let bg = BackgroundMedium::with_ksq(10.0).unwrap();
    let p = KernelParams::default();
    let ctx = KernelContext::new(&bg, &p).unwrap();
    let q = KernelQuery {
        x: ProbePoint::cartesian(0.3, 0.2),
        z: ProbePoint::cartesian(-0.1, 0.5),
        dx: Some(Direction::new(0.4)),
        dz: Some(Direction::new(1.1)),
    };
    c.bench_function("k1 eval", |b| b.iter(|| ctx.eval(Kernel::K1, black_box(&q)).unwrap()));
    c.bench_function("k4 eval", |b| b.iter(|| ctx.eval(Kernel::K4, black_box(&q)).unwrap()));

    let static_ctx = KernelContext::new(&BackgroundMedium::with_ksq(0.0).unwrap(), &p).unwrap();
    let grid = ScanGrid::Radial { theta: 0.7, r_min: 0.0, r_max: 0.95, count: 96 };
    let d = Direction::new(1.3);
    c.bench_function("k4 radial argmax", |b| {
        b.iter(|| {
            argmax_scan(Kernel::K4, ProbePoint::polar(0.4, 0.7), Some(d), Some(DirectionRule::Fixed(d)), &grid, &static_ctx)
                .unwrap()
        })
    });
}

fn indices(c: &mut Criterion) {
    let bg = BackgroundMedium::with_ksq(10.0).unwrap();
    let p = KernelParams::default();
    let grid = SamplingGrid::new(0.05, 0.95).unwrap();
    c.bench_function("index plan, spacing 0.05", |b| b.iter(|| IndexPlan::for_samples(&grid, &p, &bg, 48).unwrap()));

    let plan = IndexPlan::for_samples(&SamplingGrid::default_for(&bg), &p, &bg, 48).unwrap();
    let cfg = PointSourceConfig {
        monopoles: vec![Monopole { location: ProbePoint::cartesian(0.5, 0.2), weight: Complex64::new(1.0, 0.0) }],
        dipoles: vec![],
    };
    let trace = point_source_trace(&cfg, &bg, 48, 23).unwrap();
    c.bench_function("monopole index, spacing 0.02", |b| b.iter(|| plan.index_mo(black_box(&trace)).unwrap()));
    c.bench_function("dipole index, spacing 0.02", |b| b.iter(|| plan.index_di(black_box(&trace), None).unwrap()));
}

criterion_group!(benches, kernels, indices);
criterion_main!(benches);
