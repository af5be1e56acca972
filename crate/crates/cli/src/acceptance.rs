//! The acceptance suite, shared by `dsm verify` and the `acceptance` test
//! target. Each criterion reports a single pass/fail line.

use crate::run::{self, ReconstructOptions};
use crate::spec::ExperimentSpec;
use dsm_core::boundary::{default_max_mode, dft, sobolev_pair};
use dsm_core::forward::noise::uniform_sample;
use dsm_core::forward::{
    analytic_transmission, bounded_transmission_trace, decoupling_ratio, mesh_disk, neumann_to_incident_scale,
    point_source_trace, scattered_trace, Dipole, Inclusion, InclusionKind, Influx, MediumConfig, Monopole,
    PointSourceConfig,
};
use dsm_core::kernels::{argmax_scan, DirectionRule, Kernel, KernelContext, KernelParams, KernelQuery, ScanGrid};
use dsm_core::probing::zeta_pointwise;
use dsm_core::reconstruction::{index_mo_direct, IndexField, IndexPlan, SamplingGrid};
use dsm_core::special::{bessel_i, bessel_i_prime, bessel_k, bessel_k_prime};
use dsm_core::{BackgroundMedium, BoundaryTrace, Direction, ProbePoint, Result, SobolevParams};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::time::{Duration, Instant};

pub const EXAMPLE1: &str = include_str!("../../../configs/example1.json");
pub const EXAMPLE2: &str = include_str!("../../../configs/example2.json");
pub const EXAMPLE3: &str = include_str!("../../../configs/example3.json");

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] criterion {:>2} {}: {} ({:.1} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

/// A check result: pass flag and a one-line explanation.
type Check = Result<(bool, String)>;

fn timed(id: u8, name: &'static str, limit: Option<f64>, f: impl FnOnce() -> Check) -> Outcome {
    let start = Instant::now();
    let res = f();
    let elapsed = start.elapsed();
    let (mut passed, mut detail) = match res {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(limit) = limit {
        if elapsed.as_secs_f64() > limit {
            passed = false;
            detail.push_str(&format!("; over the {limit} s budget"));
        }
    }
    Outcome { id, name, passed, detail, elapsed }
}

pub fn wronskian() -> Check {
    let mut worst = 0.0f64;
    for z in [0.1, 1.0, 10f64.sqrt(), 10.0, 40.0] {
        for n in 0..=60 {
            let w = bessel_i(n, z)? * bessel_k_prime(n, z)? - bessel_i_prime(n, z)? * bessel_k(n, z)?;
            worst = worst.max((w + 1.0 / z).abs() * z);
        }
    }
    Ok((worst <= 1e-10, format!("max relative Wronskian error {worst:.2e}")))
}

pub fn kernel_argmax() -> Check {
    let ctx = KernelContext::new(&BackgroundMedium::with_ksq(0.0)?, &KernelParams::default())?;
    let theta = 0.7;
    let grid = ScanGrid::Radial { theta, r_min: 0.0, r_max: 0.95, count: 96 };
    let d = Direction::new(1.3);
    let k1 = |r: f64| argmax_scan(Kernel::K1, ProbePoint::polar(r, theta), None, None, &grid, &ctx).map(|a| a.location.r);
    let k4 = |r: f64| {
        argmax_scan(Kernel::K4, ProbePoint::polar(r, theta), Some(d), Some(DirectionRule::Fixed(d)), &grid, &ctx)
            .map(|a| a.location.r)
    };
    let got = [k4(0.4)?, k4(0.6)?, k1(0.4)?, k1(0.7)?];
    let want = [0.386, 0.598, 0.342, 0.666];
    let ok = got.iter().zip(want).all(|(g, w)| (g - w).abs() <= 0.01);
    Ok((
        ok,
        format!(
            "K4(0.4) {:.4}, K4(0.6) {:.4}, K1(0.4) {:.4}, K1(0.7) {:.4}",
            got[0], got[1], got[2], got[3]
        ),
    ))
}

pub fn decoupling_zeros() -> Check {
    let ctx = KernelContext::new(&BackgroundMedium::with_ksq(0.0)?, &KernelParams::default())?;
    let mut worst = 0.0f64;
    for (r1, r2, t) in [(0.5, 0.3, 0.9), (0.2, 0.7, -2.0), (0.6, 0.6, 3.0), (0.35, 0.1, 0.0)] {
        let (x, z) = (ProbePoint::polar(r1, t), ProbePoint::polar(r2, t));
        let d = Some(Direction::new(t));
        worst = worst.max(ctx.eval(Kernel::K2, &KernelQuery { x, z, dx: None, dz: d })?);
        worst = worst.max(ctx.eval(Kernel::K3, &KernelQuery { x, z, dx: d, dz: None })?);
    }
    Ok((worst <= 1e-10, format!("max normalized K2/K3 {worst:.2e}")))
}

/// Neumann Green trace on the unit circle: free-space `K_0(k|y - z|)/(2 pi)`
/// minus the reflected part of its addition series.
fn green_trace_pointwise(z: ProbePoint, theta: f64, k: f64) -> Result<f64> {
    let dist = (theta.cos() - z.x()).hypot(theta.sin() - z.y());
    let mut v = bessel_k(0, k * dist)?;
    for n in 0..120usize {
        let refl = bessel_i(n, k * z.r)? * bessel_k_prime(n, k)? * bessel_i(n, k)? / bessel_i_prime(n, k)?;
        v -= if n == 0 { 1.0 } else { 2.0 } * refl * (n as f64 * (theta - z.theta)).cos();
    }
    Ok(v / (2.0 * PI))
}

pub fn spectral_consistency() -> Check {
    let bg = BackgroundMedium::with_ksq(10.0)?;
    let k = bg.k();
    let (samples, max_mode) = (256, 60);
    let p = SobolevParams::new(1.0)?;
    let mut worst = 0.0f64;
    for i in 0..20u64 {
        let u = |j: u64| 0.5 * (uniform_sample(2024, 4 * i + j) + 1.0);
        let x = ProbePoint::polar(0.8 * u(0), 2.0 * PI * u(1));
        let z = ProbePoint::polar(0.8 * u(2), 2.0 * PI * u(3));
        let zeta = BoundaryTrace::from_fn(1.0, samples, |t| zeta_pointwise(x, t, &bg, 150).unwrap_or(Complex64::new(f64::NAN, 0.0)))?;
        let green = BoundaryTrace::from_fn(1.0, samples, |t| Complex64::new(green_trace_pointwise(z, t, k).unwrap_or(f64::NAN), 0.0))?;
        let got = sobolev_pair(&dft(&zeta, max_mode)?, &dft(&green, max_mode)?, p)?;
        let mut want = 0.0;
        for n in 1..=max_mode {
            let lam = bessel_i(n, k)? / (k * bessel_i_prime(n, k)?);
            let px = bessel_i(n, k * x.r)? / bessel_i(n, k)?;
            let pz = bessel_i(n, k * z.r)? / bessel_i(n, k)?;
            want += 2.0 * (n * n) as f64 / (2.0 * PI) * px * lam * pz * (n as f64 * (x.theta - z.theta)).cos();
        }
        worst = worst.max((got - want).norm() / want.abs());
    }
    Ok((worst <= 1e-8, format!("max relative deviation {worst:.2e} over 20 pairs")))
}

pub fn alternative_characterization() -> Check {
    let bg = BackgroundMedium::with_ksq(10.0)?;
    let grid = SamplingGrid::new(0.1, 0.95)?;
    let p = KernelParams::default();
    let cfg = PointSourceConfig {
        monopoles: vec![Monopole { location: ProbePoint::cartesian(0.3, -0.2), weight: Complex64::new(1.0, 0.5) }],
        dipoles: vec![Dipole {
            location: ProbePoint::cartesian(-0.4, 0.5),
            weight: Complex64::new(0.7, 0.0),
            direction: Direction::new(0.3),
        }],
    };
    let trace = point_source_trace(&cfg, &bg, 48, default_max_mode(48))?;
    let fast = IndexPlan::for_samples(&grid, &p, &bg, 48)?.index_mo(&trace)?;
    let slow = index_mo_direct(&trace, &grid, &p, &bg)?;
    let worst = fast
        .raw
        .iter()
        .zip(&slow.raw)
        .map(|(a, b)| (a - b).abs() / b.abs().max(1e-300))
        .fold(0.0, f64::max);
    Ok((worst <= 1e-10, format!("max relative difference {worst:.2e}")))
}

fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

pub fn forward_cross_validation() -> Check {
    let bg = BackgroundMedium::with_ksq(10.0)?;
    let (m, ri) = (3usize, 0.3);
    let kind = InclusionKind::Conductivity(2.0);
    let medium = MediumConfig::new(bg, vec![Inclusion { center: [0.0, 0.0], radius: ri, kind }])?;
    let influx = Influx::exponential(m as u32);
    let mesh = mesh_disk(1.0, 1.0 / 60.0)?;
    let probes = 128;
    let fem = scattered_trace(&medium, &influx, &mesh, probes)?;
    let angles = fem.angles().to_vec();

    let scale = neumann_to_incident_scale(m, &bg)?;
    let amp = analytic_transmission(m, &bg, ri, kind)? * bessel_k(m, bg.k())?;
    let scaled: Vec<Complex64> = fem.values().iter().map(|v| v * scale).collect();
    let free: Vec<Complex64> = angles.iter().map(|&t| Complex64::from_polar(amp, m as f64 * t)).collect();
    let err_free = rel_l2(&scaled, &free);

    let bounded = bounded_transmission_trace(&bg, ri, kind, &influx, &angles)?;
    let err_bounded = rel_l2(fem.values(), &bounded);

    let c = dft(&fem, default_max_mode(probes))?;
    let total: f64 = c.iter().map(|(_, v)| v.norm_sqr()).sum();
    let selectivity = (c.get(m as i64).norm_sqr() + c.get(-(m as i64)).norm_sqr()) / total;

    let ok = err_free <= 0.03 && selectivity >= 0.95;
    Ok((
        ok,
        format!(
            "rel L2 vs beta K_m(k) {:.3} (ratio {:.3}); vs bounded-disk solution {:.2e}; mode energy {:.4}",
            err_free,
            scaled[0].re / free[0].re,
            err_bounded,
            selectivity
        ),
    ))
}

pub fn frequency_decoupling() -> Check {
    let bg = BackgroundMedium::with_ksq(10.0)?;
    let tau = (1..=20)
        .map(|m| decoupling_ratio(m, &bg, 0.3, 2.0, 22.0))
        .collect::<Result<Vec<_>>>()?;
    let positive = tau.iter().all(|&t| t > 0.0);
    let slope = (2..=20).map(|m| tau[m - 1] / m as f64).fold(f64::INFINITY, f64::min);
    let bound = 0.5 * tau[1] / 2.0;
    Ok((
        positive && slope >= bound,
        format!("tau_1 {:.3}, tau_20 {:.3}, min tau_m/m {:.3} vs bound {:.3}", tau[0], tau[19], slope, bound),
    ))
}

pub fn point_source_localization() -> Check {
    let bg = BackgroundMedium::with_ksq(0.0)?;
    let z1 = ProbePoint::cartesian(0.6, 0.45);
    let z2 = ProbePoint::cartesian(0.45, -0.6);
    let cfg = PointSourceConfig {
        monopoles: vec![Monopole { location: z1, weight: Complex64::new(6.0, 0.0) }],
        dipoles: vec![Dipole { location: z2, weight: Complex64::new(1.0, 0.0), direction: Direction::new(z2.theta) }],
    };
    let samples = 256;
    let trace = point_source_trace(&cfg, &bg, samples, default_max_mode(samples))?;
    let grid = SamplingGrid::default_for(&bg);
    let plan = IndexPlan::for_samples(&grid, &KernelParams::default(), &bg, samples)?;
    let mo = plan.index_mo(&trace)?.argmax();
    let di = plan.index_di(&trace, None)?.argmax();
    let tangential: Vec<Direction> = grid.points.iter().map(|x| Direction::new(x.theta)).collect();
    let di_tan = plan.index_di(&trace, Some(&tangential))?.argmax();
    let (e1, e2) = (mo.distance(&z1), di.distance(&z2));
    Ok((
        e1 <= 0.1 && e2 <= 0.1,
        format!(
            "mo argmax ({:.2}, {:.2}) is {:.3} from the monopole; di argmax ({:.2}, {:.2}) is {:.3} from the dipole \
             (tangential directions: {:.3})",
            mo.x(),
            mo.y(),
            e1,
            di.x(),
            di.y(),
            e2,
            di_tan.distance(&z2)
        ),
    ))
}

fn nearest_peak(field: &IndexField, target: [f64; 2]) -> f64 {
    let t = ProbePoint::cartesian(target[0], target[1]);
    field
        .local_maxima(run::PEAK_THRESHOLD)
        .iter()
        .map(|(p, _)| p.distance(&t))
        .fold(f64::INFINITY, f64::min)
}

fn example_fields(text: &str) -> Result<run::Reconstruction> {
    let spec = ExperimentSpec::from_json(text)?;
    let (low, high) = run::forward_traces(&spec)?;
    let high = high.expect("example configs carry two influxes");
    run::reconstruct_traces(&spec, &low.noisy, Some(&high.noisy), ReconstructOptions::default())
}

fn dist(p: ProbePoint, target: [f64; 2]) -> f64 {
    p.distance(&ProbePoint::cartesian(target[0], target[1]))
}

pub fn examples() -> Check {
    let tol = 0.15;
    let mut parts = Vec::new();
    let mut ok = true;

    let start = Instant::now();
    let r = example_fields(EXAMPLE1)?;
    let (a, b) = (dist(r.mo.argmax(), [0.4, 0.0]), dist(r.di.argmax(), [-0.4, 0.0]));
    ok &= a <= tol && b <= tol && start.elapsed().as_secs_f64() < 120.0;
    parts.push(format!("ex1 mo {a:.3}, di {b:.3}"));

    let start = Instant::now();
    let r = example_fields(EXAMPLE2)?;
    let v = [nearest_peak(&r.mo, [-0.5, -0.3]), nearest_peak(&r.mo, [0.5, -0.3])];
    let s = dist(r.di.argmax(), [-0.4, 0.4]).min(nearest_peak(&r.di, [-0.4, 0.4]));
    ok &= v.iter().all(|&d| d <= tol) && s <= tol && start.elapsed().as_secs_f64() < 120.0;
    parts.push(format!("ex2 mo {:.3}/{:.3}, di {s:.3}", v[0], v[1]));

    let start = Instant::now();
    let r = example_fields(EXAMPLE3)?;
    let v = [nearest_peak(&r.mo, [0.4, 0.0]), nearest_peak(&r.mo, [-0.4, 0.0])];
    let s = [nearest_peak(&r.di, [0.0, 0.4]), nearest_peak(&r.di, [0.0, -0.4])];
    ok &= v.iter().chain(&s).all(|&d| d <= tol) && start.elapsed().as_secs_f64() < 120.0;
    parts.push(format!("ex3 mo {:.3}/{:.3}, di {:.3}/{:.3}", v[0], v[1], s[0], s[1]));

    Ok((ok, format!("distances to centres (tolerance {tol}): {}", parts.join("; "))))
}

fn read_all(dir: &Path) -> Result<Vec<(String, Vec<u8>)>> {
    let mut files: Vec<_> = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<Vec<_>>>()?;
    files.sort();
    files
        .into_iter()
        .map(|p| Ok((p.file_name().unwrap_or_default().to_string_lossy().into_owned(), std::fs::read(&p)?)))
        .collect()
}

pub fn scale_and_determinism(work: &Path) -> Check {
    let spec = ExperimentSpec::from_json(EXAMPLE1)?;
    let (low, high) = run::forward_traces(&spec)?;
    let high = high.expect("two influxes");
    let c = Complex64::new(-2.5, 4.0);
    let opts = ReconstructOptions::default();
    let a = run::reconstruct_traces(&spec, &low.noisy, Some(&high.noisy), opts)?;
    let b = run::reconstruct_traces(&spec, &low.noisy.scaled(c), Some(&high.noisy.scaled(c)), opts)?;
    let worst = a
        .mo
        .normalized_sq
        .iter()
        .zip(&b.mo.normalized_sq)
        .chain(a.di.normalized_sq.iter().zip(&b.di.normalized_sq))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);

    let mut runs = Vec::new();
    for name in ["run_a", "run_b"] {
        let dir = work.join(name);
        if dir.exists() {
            std::fs::remove_dir_all(&dir)?;
        }
        run::run_forward(&spec, &dir)?;
        run::run_reconstruct(&spec, &dir, &dir, opts)?;
        runs.push(read_all(&dir)?);
    }
    let identical = runs[0] == runs[1];
    Ok((
        worst <= 1e-12 && identical,
        format!(
            "max normalized difference under scaling {worst:.2e}; {} output files {}",
            runs[0].len(),
            if identical { "byte-identical" } else { "differ" }
        ),
    ))
}

pub fn gamma_sharpness() -> Check {
    let spec = ExperimentSpec::from_json(EXAMPLE1)?;
    let medium = spec.medium()?;
    let low = run::simulate(&medium, &spec.influx_low, spec.probes.count, spec.mesh.h, spec.noise.delta, spec.noise.seed)?;
    let bg = spec.background()?;
    let grid = spec.sampling_grid()?;
    let ratio = |gamma: f64| -> Result<f64> {
        let p = KernelParams { gamma, ..spec.params };
        Ok(IndexPlan::for_samples(&grid, &p, &bg, low.noisy.len())?.index_mo(&low.noisy)?.peak_to_mean())
    };
    let (one, zero) = (ratio(1.0)?, ratio(0.0)?);
    Ok((one > zero, format!("peak-to-mean {one:.3} with gamma = 1, {zero:.3} with gamma = 0")))
}

/// Runs every criterion in order; `work` receives the CLI determinism runs.
pub fn run_all(work: &Path) -> Vec<Outcome> {
    vec![
        timed(1, "Bessel Wronskian", Some(1.0), wronskian),
        timed(2, "kernel argmax reproduction", Some(10.0), kernel_argmax),
        timed(3, "decoupling zeros", None, decoupling_zeros),
        timed(4, "spectral consistency", Some(5.0), spectral_consistency),
        timed(5, "alternative characterization", None, alternative_characterization),
        timed(6, "forward solver cross-validation", Some(60.0), forward_cross_validation),
        timed(7, "frequency decoupling", Some(1.0), frequency_decoupling),
        timed(8, "point-source localization", Some(30.0), point_source_localization),
        timed(9, "end-to-end examples", Some(360.0), examples),
        timed(10, "scale invariance and determinism", None, || scale_and_determinism(work)),
        timed(11, "gamma sharpness", None, gamma_sharpness),
    ]
}
