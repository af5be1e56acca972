//! Experiment configuration files.

use dsm_core::forward::{build_medium, BackgroundSpec, InclusionSpec, Influx, MediumConfig, MeshSpec, NoiseSpec, ProbesSpec};
use dsm_core::kernels::KernelParams;
use dsm_core::reconstruction::SamplingGrid;
use dsm_core::{BackgroundMedium, DsmError};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub spacing: f64,
    pub max_radius: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { spacing: 0.02, max_radius: 0.95 }
    }
}

/// A forward configuration extended with the second influx, the sampling
/// grid and the index parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub background: BackgroundSpec,
    #[serde(default)]
    pub inclusions: Vec<InclusionSpec>,
    #[serde(alias = "influx")]
    pub influx_low: Influx,
    #[serde(default)]
    pub influx_high: Option<Influx>,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub probes: ProbesSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub params: KernelParams,
    #[serde(default)]
    pub mesh: MeshSpec,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self, DsmError> {
        let spec: ExperimentSpec =
            serde_json::from_str(text).map_err(|e| DsmError::Config { path: "<root>".into(), detail: e.to_string() })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DsmError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| DsmError::Config {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), DsmError> {
        self.medium()?;
        self.noise.validate()?;
        self.params.validate()?;
        self.sampling_grid()?;
        if self.probes.count < 4 {
            return Err(config("probes.count", "need at least 4 probes"));
        }
        if let Some(high) = self.influx_high {
            if high.mode <= self.influx_low.mode {
                return Err(config(
                    "influx_high.mode",
                    format!("must exceed influx_low.mode ({} <= {})", high.mode, self.influx_low.mode),
                ));
            }
        }
        Ok(())
    }

    pub fn medium(&self) -> Result<MediumConfig, DsmError> {
        build_medium(&self.background, &self.inclusions)
    }

    pub fn background(&self) -> Result<BackgroundMedium, DsmError> {
        self.background.build()
    }

    pub fn sampling_grid(&self) -> Result<SamplingGrid, DsmError> {
        let bg = self.background()?;
        let grid = SamplingGrid::new(self.grid.spacing, self.grid.max_radius)?;
        grid.check(&bg)?;
        Ok(grid)
    }

    /// The high-frequency influx, required outside single-trace mode.
    pub fn high(&self) -> Result<Influx, DsmError> {
        self.influx_high
            .ok_or_else(|| config("influx_high", "missing (required unless --single)"))
    }
}

fn config(path: &str, detail: impl Into<String>) -> DsmError {
    DsmError::Config { path: path.into(), detail: detail.into() }
}
