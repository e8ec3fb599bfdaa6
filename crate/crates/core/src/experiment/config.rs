use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Region;
use crate::error::{Error, Result};
use crate::frac_tf::{ApproxConfig, HighOrderPlant};
use crate::moga::GAConfig;
use crate::sim_engine::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlantConfig {
    pub gain: f64,
    pub time_constant: f64,
    pub order: f64,
}

impl Default for PlantConfig {
    fn default() -> Self {
        PlantConfig { gain: 1.0, time_constant: 20.0, order: 4.0 }
    }
}

impl PlantConfig {
    pub fn to_plant(&self) -> Result<HighOrderPlant> {
        HighOrderPlant::new(self.gain, self.time_constant, self.order)
    }
}

/// One controller and predictor split, for single-loop simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Candidate {
    pub k_p: f64,
    pub k_i: f64,
    pub lambda: f64,
    pub chi: f64,
}

impl Default for Candidate {
    fn default() -> Self {
        Candidate { k_p: 0.5, k_i: 0.02, lambda: 1.0, chi: 1.0 }
    }
}

/// Provenance written into manifests; ignored on input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunInfo {
    pub tool: String,
    pub version: String,
    pub command: String,
}

impl RunInfo {
    pub fn new(command: &str) -> Self {
        RunInfo {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
        }
    }
}

/// Everything a run needs. Run manifests use the same format, so a manifest
/// can be fed back as a config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    pub chi_values: Vec<f64>,
    /// Pools compare `chi <= split_at` against `chi > split_at`.
    pub split_at: f64,
    pub plant: PlantConfig,
    pub candidate: Candidate,
    pub ga: GAConfig,
    pub sim: SimConfig,
    pub approx: ApproxConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<Region>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<RunInfo>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            chi_values: vec![0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8],
            split_at: 1.0,
            plant: PlantConfig::default(),
            candidate: Candidate::default(),
            ga: GAConfig::default(),
            sim: SimConfig::default(),
            approx: ApproxConfig::default(),
            region: None,
            run: None,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let plant = self.plant.to_plant()?;
        if self.chi_values.is_empty() {
            return Err(Error::invalid("chi_values must not be empty"));
        }
        let top = plant.order.min(2.0);
        if let Some(c) = self.chi_values.iter().find(|&&c| !(c > 0.0 && c < top)) {
            return Err(Error::invalid(format!("chi {c} outside (0, {top})")));
        }
        if self.ga.bounds.len() != 3 {
            return Err(Error::invalid("ga.bounds needs one [low, high] pair for each of k_p, k_i, lambda"));
        }
        self.ga.validate()?;
        self.sim.validate()?;
        self.approx.validate()?;
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::invalid(format!("reading {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Numerical(format!("serializing config: {e}")))
    }
}
