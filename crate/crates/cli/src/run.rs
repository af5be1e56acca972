//! The `forward`, `reconstruct` and `kernels` commands.

use crate::spec::ExperimentSpec;
use crate::summary::Summary;
use dsm_core::forward::{add_noise, mesh_disk, scattered_trace, Influx, MediumConfig};
use dsm_core::kernels::{
    argmax_scan, argmax_scan_3d, lattice, DirectionRule, Kernel, KernelContext, KernelParams, ScanGrid, SphereContext,
};
use dsm_core::reconstruction::{IndexField, IndexPlan};
use dsm_core::{BackgroundMedium, BoundaryTrace, Direction, DsmError, ProbePoint, Result};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const TRACE_LOW: &str = "trace_low.csv";
pub const TRACE_HIGH: &str = "trace_high.csv";
pub const TRACE_LOW_CLEAN: &str = "trace_low_clean.csv";
pub const TRACE_HIGH_CLEAN: &str = "trace_high_clean.csv";

/// Threshold for reported local maxima, relative to the global maximum.
pub const PEAK_THRESHOLD: f64 = 0.5;

fn ensure_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| DsmError::Config {
        path: out.display().to_string(),
        detail: format!("cannot create output directory: {e}"),
    })
}

/// Clean and noisy traces of one measurement.
pub struct Measurement {
    pub clean: BoundaryTrace,
    pub noisy: BoundaryTrace,
}

pub fn simulate(
    medium: &MediumConfig,
    influx: &Influx,
    probes: usize,
    h: f64,
    delta: f64,
    seed: u64,
) -> Result<Measurement> {
    let mesh = mesh_disk(medium.background.radius, h)?;
    let clean = scattered_trace(medium, influx, &mesh, probes)?;
    let noisy = add_noise(&clean, delta, seed);
    Ok(Measurement { clean, noisy })
}

/// Traces for the experiment; the high-frequency one is skipped when the
/// spec has no second influx.
pub fn forward_traces(spec: &ExperimentSpec) -> Result<(Measurement, Option<Measurement>)> {
    let medium = spec.medium()?;
    let run = |influx: &Influx, seed: u64| {
        simulate(&medium, influx, spec.probes.count, spec.mesh.h, spec.noise.delta, seed)
    };
    let low = run(&spec.influx_low, spec.noise.seed)?;
    let high = spec
        .influx_high
        .map(|f| run(&f, spec.noise.seed.wrapping_add(1)))
        .transpose()?;
    Ok((low, high))
}

/// Writes the clean and noisy traces; returns the files written.
pub fn run_forward(spec: &ExperimentSpec, out: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(out)?;
    let (low, high) = forward_traces(spec)?;
    let mut written = Vec::new();
    let mut write = |name: &str, t: &BoundaryTrace| -> Result<()> {
        let path = out.join(name);
        t.write_csv_file(&path)?;
        written.push(path);
        Ok(())
    };
    write(TRACE_LOW, &low.noisy)?;
    write(TRACE_LOW_CLEAN, &low.clean)?;
    if let Some(high) = high {
        write(TRACE_HIGH, &high.noisy)?;
        write(TRACE_HIGH_CLEAN, &high.clean)?;
    }
    Ok(written)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ReconstructOptions {
    /// Compute both indices from the low-frequency trace.
    pub single: bool,
    /// Overrides `params.gamma`.
    pub gamma: Option<f64>,
}

#[derive(Serialize)]
struct Peak {
    x: f64,
    y: f64,
    value: f64,
}

fn peaks(field: &IndexField) -> Vec<Peak> {
    field
        .local_maxima(PEAK_THRESHOLD)
        .into_iter()
        .map(|(p, value)| Peak { x: p.x(), y: p.y(), value })
        .collect()
}

#[derive(Serialize)]
struct SummaryParams {
    #[serde(flatten)]
    kernel: KernelParams,
    sigma0: f64,
    v0: f64,
    radius: f64,
    probes: usize,
    max_mode: usize,
    grid_spacing: f64,
    grid_max_radius: f64,
    influx_low: Influx,
    influx_high: Option<Influx>,
    single: bool,
}

pub struct Reconstruction {
    pub mo: IndexField,
    pub di: IndexField,
}

fn read_trace(dir: &Path, name: &str, bg: &BackgroundMedium, probes: usize) -> Result<BoundaryTrace> {
    let path = dir.join(name);
    let t = BoundaryTrace::read_csv_file(&path, bg.radius).map_err(|e| match e {
        DsmError::Io(io) => DsmError::Layout(format!("{}: {io}", path.display())),
        other => other,
    })?;
    if t.len() != probes {
        return Err(DsmError::Layout(format!(
            "{} has {} samples, spec expects {probes}",
            path.display(),
            t.len()
        )));
    }
    Ok(t)
}

/// Index fields from traces in memory.
pub fn reconstruct_traces(
    spec: &ExperimentSpec,
    low: &BoundaryTrace,
    high: Option<&BoundaryTrace>,
    opts: ReconstructOptions,
) -> Result<Reconstruction> {
    let bg = spec.background()?;
    let grid = spec.sampling_grid()?;
    let mut params = spec.params;
    if let Some(g) = opts.gamma {
        params.gamma = g;
    }
    let high = if opts.single { low } else { high.ok_or_else(|| DsmError::Layout("missing high-frequency trace".into()))? };
    low.check_layout(high)?;
    let plan = IndexPlan::for_samples(&grid, &params, &bg, low.len())?;
    Ok(Reconstruction {
        mo: plan.index_mo(low)?,
        di: plan.index_di(high, None)?,
    })
}

/// Reads traces from `traces`, writes index fields and `summary.json` to `out`.
pub fn run_reconstruct(spec: &ExperimentSpec, traces: &Path, out: &Path, opts: ReconstructOptions) -> Result<Reconstruction> {
    if !opts.single {
        spec.high()?;
    }
    let bg = spec.background()?;
    let low = read_trace(traces, TRACE_LOW, &bg, spec.probes.count)?;
    let high = if opts.single { None } else { Some(read_trace(traces, TRACE_HIGH, &bg, spec.probes.count)?) };
    let rec = reconstruct_traces(spec, &low, high.as_ref(), opts)?;
    ensure_dir(out)?;
    write_reconstruction(spec, &rec, low.len(), opts, out)?;
    Ok(rec)
}

fn write_reconstruction(
    spec: &ExperimentSpec,
    rec: &Reconstruction,
    probes: usize,
    opts: ReconstructOptions,
    out: &Path,
) -> Result<()> {
    rec.mo.write_csv_file(out.join("index_mo.csv"))?;
    rec.mo.write_pgm_file(out.join("index_mo.pgm"))?;
    rec.di.write_csv_file(out.join("index_di.csv"))?;
    rec.di.write_pgm_file(out.join("index_di.pgm"))?;
    let mut w = std::io::BufWriter::new(std::fs::File::create(out.join("directions.csv"))?);
    rec.di.write_directions_csv(&mut w)?;
    w.flush()?;

    let mut params = spec.params;
    if let Some(g) = opts.gamma {
        params.gamma = g;
    }
    let sp = SummaryParams {
        kernel: params,
        sigma0: spec.background.sigma0,
        v0: spec.background.v0,
        radius: spec.background.radius,
        probes,
        max_mode: dsm_core::boundary::default_max_mode(probes),
        grid_spacing: spec.grid.spacing,
        grid_max_radius: spec.grid.max_radius,
        influx_low: spec.influx_low,
        influx_high: if opts.single { None } else { spec.influx_high },
        single: opts.single,
    };
    let (amo, adi) = (rec.mo.argmax(), rec.di.argmax());
    let mut s = Summary::new();
    s.add("argmax_mo", &[amo.x(), amo.y()])?
        .add("argmax_di", &[adi.x(), adi.y()])?
        .add("local_maxima_mo", &peaks(&rec.mo))?
        .add("local_maxima_di", &peaks(&rec.di))?
        .add("peak_to_mean_mo", &rec.mo.peak_to_mean())?
        .add("peak_to_mean_di", &rec.di.peak_to_mean())?
        .add("degenerate_directions", &rec.di.degenerate.as_ref().map_or(0, |d| d.iter().filter(|&&f| f).count()))?
        .add("params", &sp)?;
    std::fs::write(out.join("summary.json"), s.render())?;
    Ok(())
}

/// What the `kernels` command computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelMode {
    Scan(Kernel),
    /// Radial argmax of K1 or K4 along equal angles.
    Argmax(Kernel),
    Sphere,
}

#[derive(Clone, Debug)]
pub struct KernelsRequest {
    pub mode: KernelMode,
    pub background: BackgroundMedium,
    pub params: KernelParams,
    /// Source point for 2D scans.
    pub z: [f64; 2],
    /// Source radius for radial argmax scans.
    pub r1: f64,
    /// Fixed point for the 3D scan.
    pub x3: [f64; 3],
    pub spacing: f64,
    pub max_radius: f64,
}

impl Default for KernelsRequest {
    fn default() -> Self {
        KernelsRequest {
            mode: KernelMode::Scan(Kernel::K1),
            background: BackgroundMedium::with_ksq(0.0).expect("static background"),
            params: KernelParams::default(),
            z: [0.5, 0.2],
            r1: 0.4,
            x3: [0.114, 0.114, 0.396],
            spacing: 0.02,
            max_radius: 0.95,
        }
    }
}

/// Outcome of a kernels run: the maximizer and the file written.
#[derive(Clone, Debug)]
pub struct KernelsReport {
    pub argmax: Vec<f64>,
    pub value: f64,
    pub file: PathBuf,
}

fn write_rows(path: &Path, header: &str, rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "{header}")?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

fn kernel_name(k: Kernel) -> &'static str {
    match k {
        Kernel::K1 => "k1",
        Kernel::K2 => "k2",
        Kernel::K3 => "k3",
        Kernel::K4 => "k4",
    }
}

/// Kernel scans over sampling points with the source fixed. Directions are
/// tangential at both points.
pub fn run_kernels(req: &KernelsRequest, out: &Path) -> Result<KernelsReport> {
    ensure_dir(out)?;
    match req.mode {
        KernelMode::Scan(kernel) => {
            let ctx = KernelContext::new(&req.background, &req.params)?;
            let z = ProbePoint::cartesian(req.z[0], req.z[1]);
            z.check_interior(&req.background)?;
            let dz = kernel.source_kind().needs_direction().then(|| Direction::new(z.theta));
            let src = ctx.source(kernel, z, dz)?;
            let pts = lattice(req.spacing, req.max_radius);
            let vals = pts
                .iter()
                .map(|&(_, _, x, y)| {
                    let p = ProbePoint::cartesian(x, y);
                    let dx = kernel.probe_kind().needs_direction().then(|| Direction::new(p.theta));
                    ctx.eval_with(kernel, p, dx, &src)
                })
                .collect::<Result<Vec<f64>>>()?;
            let best = (0..vals.len()).fold(0, |b, i| if vals[i] > vals[b] { i } else { b });
            let file = out.join(format!("{}.csv", kernel_name(kernel)));
            write_rows(&file, "x,y,value", pts.iter().zip(&vals).map(|(p, v)| vec![p.2, p.3, *v]))?;
            Ok(KernelsReport { argmax: vec![pts[best].2, pts[best].3], value: vals[best], file })
        }
        KernelMode::Argmax(kernel) => {
            let ctx = KernelContext::new(&req.background, &req.params)?;
            let theta = 0.0;
            let grid = ScanGrid::Radial { theta, r_min: 0.0, r_max: req.max_radius, count: 96 };
            let source = ProbePoint::polar(req.r1, theta);
            source.check_interior(&req.background)?;
            let d = Direction::new(theta + std::f64::consts::FRAC_PI_2);
            let (dz, rule) = match kernel {
                Kernel::K1 => (None, None),
                Kernel::K4 => (Some(d), Some(DirectionRule::Fixed(d))),
                _ => return Err(DsmError::Config { path: "kernel".into(), detail: "argmax supports k1 and k4".into() }),
            };
            let res = argmax_scan(kernel, source, dz, rule, &grid, &ctx)?;
            let src = ctx.source(kernel, source, dz)?;
            let file = out.join(format!("argmax_{}.csv", kernel_name(kernel)));
            let rows = grid
                .points()
                .into_iter()
                .map(|p| ctx.eval_with(kernel, p, dz, &src).map(|v| vec![p.r, v]))
                .collect::<Result<Vec<_>>>()?;
            write_rows(&file, "r,value", rows.into_iter())?;
            Ok(KernelsReport { argmax: vec![res.location.r], value: res.value, file })
        }
        KernelMode::Sphere => {
            let ctx = SphereContext::new(&req.background, &req.params)?;
            let (loc, value, field) = argmax_scan_3d(req.x3, req.spacing, req.max_radius, &ctx)?;
            let file = out.join("k1_3d.csv");
            write_rows(&file, "x,y,z,value", field.iter().map(|(p, v)| vec![p[0], p[1], p[2], *v]))?;
            Ok(KernelsReport { argmax: loc.to_vec(), value, file })
        }
    }
}
