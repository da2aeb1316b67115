//! JSON scenario configuration.
//!
//! ```json
//! {
//!   "lattice":     { "N": 8192, "L_dom": 1024.0 },
//!   "physics":     { "m": 1.0 },
//!   "packet":      { "k0": 2.0, "delta_k": 0.1, "x0": -80.0, "amplitude": 1.0, "k_max": null },
//!   "truncation":  { "cut": 0.0, "epsilon": 0.25 },
//!   "schedule":    { "t_values": [0.0, 20.0, 40.0] },
//!   "observation": { "window": [-300.0, -50.0],
//!                    "smearing": { "kind": "gaussian", "width": 0.2 },
//!                    "thresholds": { "condition": 10.0, "ratio": 3.0 } },
//!   "sweep":       { "x0": [...], "amplitude": [...] },
//!   "output":      { "dir": "out", "formats": ["csv", "json"] }
//! }
//! ```
//!
//! `lattice`, `physics` and `schedule` are always required; the other
//! sections are required by the scenarios that read them. Unknown keys are
//! rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tachyon_core::quantum::{ObservabilityThresholds, Smearing};
use tachyon_core::wavepacket::{TruncationSpec, WavepacketSpec};
use tachyon_core::{build_lattice, LatticeSpec};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub lattice: LatticeConfig,
    pub physics: PhysicsConfig,
    #[serde(default)]
    pub packet: Option<PacketConfig>,
    #[serde(default)]
    pub truncation: Option<TruncationConfig>,
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub observation: Option<ObservationConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L_dom")]
    pub l_dom: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    pub m: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub k0: f64,
    pub delta_k: f64,
    pub x0: f64,
    pub amplitude: f64,
    #[serde(default)]
    pub k_min: Option<f64>,
    #[serde(default)]
    pub k_max: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationConfig {
    pub cut: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub t_values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationConfig {
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    #[serde(default)]
    pub smearing: Option<SmearingConfig>,
    #[serde(default)]
    pub thresholds: Option<ThresholdConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SmearingConfig {
    Gaussian { width: f64 },
    Band { k_cut: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    pub condition: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub x0: Vec<f64>,
    #[serde(default)]
    pub amplitude: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default)]
    pub formats: Option<Vec<String>>,
}

/// Parsed config plus the digest of its canonical serialization.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ScenarioConfig,
    pub hash: String,
}

pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<LoadedConfig, CliError> {
    let config: ScenarioConfig =
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
    config.check_basic()?;
    // serde_json::Value keeps object keys sorted, so the digest ignores layout and key order
    let canonical = serde_json::to_value(&config).and_then(|v| serde_json::to_string(&v)).expect("config serializes");
    let hash = format!("sha256:{:x}", Sha256::digest(canonical.as_bytes()));
    Ok(LoadedConfig { config, hash })
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl ScenarioConfig {
    fn check_basic(&self) -> Result<(), CliError> {
        positive("physics.m", self.physics.m)?;
        positive("lattice.L_dom", self.lattice.l_dom)?;
        if self.schedule.t_values.is_empty() {
            return Err(CliError::Config("schedule.t_values must not be empty".into()));
        }
        for &t in &self.schedule.t_values {
            if !(t.is_finite() && t >= 0.0) {
                return Err(CliError::Config(format!("schedule.t_values must be non-negative, got {t}")));
            }
        }
        if let Some(p) = &self.packet {
            positive("packet.k0", p.k0)?;
            positive("packet.delta_k", p.delta_k)?;
            if p.k0 <= self.physics.m {
                return Err(CliError::Config(format!(
                    "packet.k0 = {} must exceed physics.m = {}",
                    p.k0, self.physics.m
                )));
            }
        }
        if let Some(t) = &self.truncation {
            positive("truncation.epsilon", t.epsilon)?;
        }
        if let Some(f) = self.output.as_ref().and_then(|o| o.formats.as_ref()) {
            for name in f {
                if name != "csv" && name != "json" {
                    return Err(CliError::Config(format!("output.formats: unknown format {name:?}")));
                }
            }
        }
        Ok(())
    }

    pub fn lattice(&self) -> Result<LatticeSpec, CliError> {
        Ok(build_lattice(self.lattice.n, self.lattice.l_dom)?)
    }

    pub fn m(&self) -> f64 {
        self.physics.m
    }

    pub fn t_max(&self) -> f64 {
        self.schedule.t_values.iter().cloned().fold(0.0, f64::max)
    }

    pub fn packet(&self) -> Result<WavepacketSpec, CliError> {
        let p = self.packet.as_ref().ok_or_else(|| missing("packet"))?;
        let mut spec = WavepacketSpec::new(p.k0, p.delta_k, p.x0, p.amplitude);
        spec.k_min = p.k_min;
        spec.k_max = p.k_max;
        Ok(spec)
    }

    pub fn truncation(&self) -> Result<TruncationSpec, CliError> {
        let t = self.truncation.as_ref().ok_or_else(|| missing("truncation"))?;
        Ok(TruncationSpec::new(t.cut, t.epsilon)?)
    }

    pub fn smearing(&self) -> Result<Smearing, CliError> {
        let s = self
            .observation
            .as_ref()
            .and_then(|o| o.smearing.as_ref())
            .ok_or_else(|| missing("observation.smearing"))?;
        Ok(match *s {
            SmearingConfig::Gaussian { width } => {
                positive("observation.smearing.width", width)?;
                Smearing::Gaussian { width }
            }
            SmearingConfig::Band { k_cut } => {
                positive("observation.smearing.k_cut", k_cut)?;
                Smearing::Band { k_cut }
            }
        })
    }

    pub fn thresholds(&self) -> ObservabilityThresholds {
        self.observation
            .as_ref()
            .and_then(|o| o.thresholds.as_ref())
            .map(|t| ObservabilityThresholds {
                condition: t.condition,
                ratio: t.ratio,
            })
            .unwrap_or_default()
    }

    pub fn window(&self) -> Option<(f64, f64)> {
        self.observation.as_ref().and_then(|o| o.window).map(|w| (w[0], w[1]))
    }

    pub fn sweep_x0(&self) -> Result<&[f64], CliError> {
        match self.sweep.as_ref().map(|s| s.x0.as_slice()) {
            Some(v) if !v.is_empty() => Ok(v),
            _ => Err(missing("sweep.x0")),
        }
    }

    pub fn sweep_amplitude(&self) -> Result<&[f64], CliError> {
        match self.sweep.as_ref().map(|s| s.amplitude.as_slice()) {
            Some(v) if !v.is_empty() => Ok(v),
            _ => Err(missing("sweep.amplitude")),
        }
    }

    pub fn output_dir(&self) -> Option<&str> {
        self.output.as_ref().and_then(|o| o.dir.as_deref())
    }

    pub fn wants(&self, format: &str) -> bool {
        match self.output.as_ref().and_then(|o| o.formats.as_ref()) {
            Some(f) => f.iter().any(|x| x == format),
            None => true,
        }
    }
}

fn missing(key: &str) -> CliError {
    CliError::Config(format!("missing config key: {key}"))
}
