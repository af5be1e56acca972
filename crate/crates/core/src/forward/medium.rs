use crate::error::{DsmError, Result};
use crate::probing::BackgroundMedium;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InclusionKind {
    Conductivity(f64),
    Potential(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Inclusion {
    pub center: [f64; 2],
    pub radius: f64,
    pub kind: InclusionKind,
}

impl Inclusion {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        (p[0] - self.center[0]).hypot(p[1] - self.center[1]) < self.radius
    }
}

/// Background plus disjoint disk inclusions.
#[derive(Clone, Debug, PartialEq)]
pub struct MediumConfig {
    pub background: BackgroundMedium,
    pub inclusions: Vec<Inclusion>,
}

impl MediumConfig {
    pub fn new(background: BackgroundMedium, inclusions: Vec<Inclusion>) -> Result<Self> {
        let big_r = background.radius;
        for (i, inc) in inclusions.iter().enumerate() {
            let path = |field: &str| format!("inclusions[{i}].{field}");
            if !(inc.radius > 0.0) || !inc.radius.is_finite() {
                return Err(DsmError::config(path("radius"), "must be finite and > 0"));
            }
            if !(inc.center[0].is_finite() && inc.center[1].is_finite()) {
                return Err(DsmError::config(path("center"), "must be finite"));
            }
            if !(inc.center[0].hypot(inc.center[1]) + inc.radius < big_r) {
                return Err(DsmError::config(path("center"), "inclusion must lie strictly inside the disk"));
            }
            match inc.kind {
                InclusionKind::Conductivity(s) if !(s > 0.0 && s.is_finite()) => {
                    return Err(DsmError::config(path("value"), format!("conductivity {s} must be > 0")));
                }
                InclusionKind::Potential(v) if !v.is_finite() => {
                    return Err(DsmError::config(path("value"), "potential must be finite"));
                }
                _ => {}
            }
        }
        for i in 0..inclusions.len() {
            for j in i + 1..inclusions.len() {
                let (a, b) = (&inclusions[i], &inclusions[j]);
                let d = (a.center[0] - b.center[0]).hypot(a.center[1] - b.center[1]);
                if d < a.radius + b.radius {
                    return Err(DsmError::config(
                        "inclusions",
                        format!("inclusions[{i}] and inclusions[{j}] overlap"),
                    ));
                }
            }
        }
        Ok(MediumConfig { background, inclusions })
    }

    pub fn homogeneous(background: BackgroundMedium) -> Self {
        MediumConfig {
            background,
            inclusions: Vec::new(),
        }
    }

    /// `(sigma, V)` at `p`.
    pub fn coefficients(&self, p: [f64; 2]) -> (f64, f64) {
        let mut out = (self.background.sigma0, self.background.v0);
        for inc in self.inclusions.iter().filter(|inc| inc.contains(p)) {
            match inc.kind {
                InclusionKind::Conductivity(s) => out.0 = s,
                InclusionKind::Potential(v) => out.1 = v,
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfluxForm {
    #[default]
    #[serde(alias = "cos")]
    Cosine,
    #[serde(alias = "exp")]
    Exponential,
}

/// Boundary flux `cos(m theta)` or `e^{i m theta}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Influx {
    pub mode: u32,
    #[serde(default)]
    pub form: InfluxForm,
}

impl Influx {
    pub fn cosine(mode: u32) -> Self {
        Influx {
            mode,
            form: InfluxForm::Cosine,
        }
    }

    pub fn exponential(mode: u32) -> Self {
        Influx {
            mode,
            form: InfluxForm::Exponential,
        }
    }

    pub fn value(&self, theta: f64) -> Complex64 {
        let a = self.mode as f64 * theta;
        match self.form {
            InfluxForm::Cosine => Complex64::new(a.cos(), 0.0),
            InfluxForm::Exponential => Complex64::from_polar(1.0, a),
        }
    }

    pub fn is_real(&self) -> bool {
        self.form == InfluxForm::Cosine || self.mode == 0
    }
}

fn default_radius() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundSpec {
    pub sigma0: f64,
    pub v0: f64,
    #[serde(default = "default_radius")]
    pub radius: f64,
}

impl BackgroundSpec {
    pub fn build(&self) -> Result<BackgroundMedium> {
        BackgroundMedium::new(self.sigma0, self.v0, self.radius)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InclusionTag {
    Sigma,
    V,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InclusionSpec {
    pub center: [f64; 2],
    pub radius: f64,
    pub kind: InclusionTag,
    pub value: f64,
}

impl InclusionSpec {
    pub fn build(&self) -> Inclusion {
        Inclusion {
            center: self.center,
            radius: self.radius,
            kind: match self.kind {
                InclusionTag::Sigma => InclusionKind::Conductivity(self.value),
                InclusionTag::V => InclusionKind::Potential(self.value),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    pub delta: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(DsmError::config("noise.delta", "must be finite and >= 0"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbesSpec {
    pub count: usize,
}

impl Default for ProbesSpec {
    fn default() -> Self {
        ProbesSpec { count: 48 }
    }
}

fn default_h() -> f64 {
    1.0 / 60.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    #[serde(default = "default_h")]
    pub h: f64,
}

impl Default for MeshSpec {
    fn default() -> Self {
        MeshSpec { h: default_h() }
    }
}

/// Forward-problem configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForwardConfig {
    pub background: BackgroundSpec,
    #[serde(default)]
    pub inclusions: Vec<InclusionSpec>,
    pub influx: Influx,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub probes: ProbesSpec,
    #[serde(default)]
    pub mesh: MeshSpec,
}

impl ForwardConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| DsmError::config("<root>", e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn medium(&self) -> Result<MediumConfig> {
        build_medium(&self.background, &self.inclusions)
    }
}

pub fn build_medium(background: &BackgroundSpec, inclusions: &[InclusionSpec]) -> Result<MediumConfig> {
    MediumConfig::new(background.build()?, inclusions.iter().map(InclusionSpec::build).collect())
}
