use clap::{Args, Parser, Subcommand, ValueEnum};
use dsm_cli::acceptance;
use dsm_cli::exit;
use dsm_cli::run::{self, KernelMode, KernelsRequest, ReconstructOptions};
use dsm_cli::spec::ExperimentSpec;
use dsm_core::forward::BackgroundSpec;
use dsm_core::kernels::{Kernel, KernelParams};
use dsm_core::{BackgroundMedium, DsmError};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dsm", version, about = "Direct sampling method for conductivity and potential inclusions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Io {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate boundary traces for both influxes.
    Forward {
        #[command(flatten)]
        io: Io,
    },
    /// Compute the index fields from traces written by `forward`.
    Reconstruct {
        #[command(flatten)]
        io: Io,
        /// Directory holding the trace files (defaults to --out).
        #[arg(long)]
        traces: Option<PathBuf>,
        /// Compute both indices from the low-frequency trace.
        #[arg(long)]
        single: bool,
        /// Override the Sobolev scale.
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Kernel scans over sampling points.
    Kernels {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        args: KernelArgs,
    },
    /// Run the acceptance suite.
    Verify {
        #[command(flatten)]
        io: Io,
    },
}

#[derive(Args)]
struct KernelArgs {
    #[arg(value_enum)]
    mode: Mode,
    /// Kernel for `argmax` (k1 or k4).
    #[arg(value_enum)]
    kernel: Option<Which>,
    /// Source radius for `argmax`.
    #[arg(long)]
    r1: Option<f64>,
    /// Source point `x,y` for 2D scans.
    #[arg(long, value_parser = parse_vec::<2>)]
    z: Option<[f64; 2]>,
    /// Fixed point `x,y,z` for the 3D scan.
    #[arg(long, value_parser = parse_vec::<3>)]
    x: Option<[f64; 3]>,
    /// Background k^2 = V0 / sigma0 (sigma0 = 1).
    #[arg(long)]
    ksq: Option<f64>,
    /// Lattice spacing.
    #[arg(long)]
    spacing: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    K1,
    K2,
    K3,
    K4,
    Argmax,
    #[value(name = "3d")]
    Sphere,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    K1,
    K4,
}

fn parse_vec<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    parts.try_into().map_err(|v: Vec<f64>| format!("expected {N} comma-separated numbers, got {}", v.len()))
}

/// Optional settings file for `kernels`.
#[derive(Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct KernelsConfig {
    background: Option<BackgroundSpec>,
    params: KernelParams,
    spacing: Option<f64>,
    max_radius: Option<f64>,
}

fn load_spec(io: &Io) -> Result<ExperimentSpec, DsmError> {
    let path = io.config.as_ref().ok_or_else(|| DsmError::Config {
        path: "--config".into(),
        detail: "a configuration file is required".into(),
    })?;
    ExperimentSpec::load(path)
}

fn config_err(path: &str, detail: impl Into<String>) -> DsmError {
    DsmError::Config { path: path.into(), detail: detail.into() }
}

fn kernels(io: &Io, args: &KernelArgs) -> Result<(), DsmError> {
    let &KernelArgs { mode, kernel: which, r1, z, x, ksq, spacing } = args;
    let cfg: KernelsConfig = match &io.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| config_err(&p.display().to_string(), e.to_string()))?;
            serde_json::from_str(&text).map_err(|e| config_err("<root>", e.to_string()))?
        }
        None => KernelsConfig::default(),
    };
    cfg.params.validate()?;
    let mut req = KernelsRequest { params: cfg.params, ..Default::default() };
    if matches!(mode, Mode::Sphere) {
        req.background = BackgroundMedium::with_ksq(10.0)?;
        req.spacing = 0.1;
        req.max_radius = 0.9;
    }
    if let Some(bg) = cfg.background {
        req.background = bg.build()?;
    }
    if let Some(k) = ksq {
        req.background = BackgroundMedium::with_ksq(k)?;
    }
    if let Some(s) = cfg.spacing.or(spacing) {
        req.spacing = s;
    }
    if let Some(r) = cfg.max_radius {
        req.max_radius = r;
    }
    if !(req.spacing > 0.0) {
        return Err(config_err("spacing", "must be > 0"));
    }
    req.mode = match mode {
        Mode::K1 => KernelMode::Scan(Kernel::K1),
        Mode::K2 => KernelMode::Scan(Kernel::K2),
        Mode::K3 => KernelMode::Scan(Kernel::K3),
        Mode::K4 => KernelMode::Scan(Kernel::K4),
        Mode::Argmax => KernelMode::Argmax(match which {
            Some(Which::K1) => Kernel::K1,
            Some(Which::K4) | None => Kernel::K4,
        }),
        Mode::Sphere => KernelMode::Sphere,
    };
    if let Some(v) = z {
        req.z = v;
    }
    if let Some(v) = r1 {
        req.r1 = v;
    }
    if let Some(v) = x {
        req.x3 = v;
    }
    let report = run::run_kernels(&req, &io.out)?;
    match req.mode {
        KernelMode::Argmax(_) => println!("argmax r2 = {:.6} (r1 = {}, value {:.6e})", report.argmax[0], req.r1, report.value),
        _ => println!(
            "argmax at ({}) value {:.6e}",
            report.argmax.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(", "),
            report.value
        ),
    }
    println!("wrote {}", report.file.display());
    Ok(())
}

fn verify(out: &Path) -> Result<bool, DsmError> {
    std::fs::create_dir_all(out).map_err(|e| config_err(&out.display().to_string(), e.to_string()))?;
    let outcomes = acceptance::run_all(out);
    for o in &outcomes {
        println!("{o}");
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    println!("{passed}/{} criteria passed", outcomes.len());
    Ok(passed == outcomes.len())
}

fn dispatch(cli: Cli) -> Result<i32, DsmError> {
    match cli.command {
        Command::Forward { io } => {
            let spec = load_spec(&io)?;
            for path in run::run_forward(&spec, &io.out)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Reconstruct { io, traces, single, gamma } => {
            let spec = load_spec(&io)?;
            let traces = traces.unwrap_or_else(|| io.out.clone());
            let rec = run::run_reconstruct(&spec, &traces, &io.out, ReconstructOptions { single, gamma })?;
            let (a, b) = (rec.mo.argmax(), rec.di.argmax());
            println!("monopole index argmax ({:.3}, {:.3})", a.x(), a.y());
            println!("dipole index argmax ({:.3}, {:.3})", b.x(), b.y());
            println!("wrote {}", io.out.join("summary.json").display());
        }
        Command::Kernels { io, args } => {
            kernels(&io, &args)?;
        }
        Command::Verify { io } => {
            if !verify(&io.out)? {
                return Ok(1);
            }
        }
    }
    Ok(exit::OK)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit::code(&e) as u8)
        }
    }
}
