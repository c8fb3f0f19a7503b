//! TOML run configuration shared by the subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use cpplab_core::measures::{IntensityMeasure, MeasurePair, MutationMeasure};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub run: RunSection,
    /// Required by `simulate --kind growth`.
    #[serde(default)]
    pub growth: Option<GrowthSection>,
    /// Required by `simulate --kind bd`.
    #[serde(default)]
    pub birth_death: Option<BdSection>,
}

/// The measure pair and window geometry.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// Branching intensity, e.g. `intensity = "Brownian"` or
    /// `intensity = { Power = { a = 0.5, c = 2.0 } }`.
    pub intensity: IntensityMeasure,
    /// Mutation rate per unit depth (μ(dx) = θ·dx).
    pub theta: f64,
    /// Window height.
    pub z: f64,
    /// Resolution: branches at or below this depth are truncated.
    pub epsilon: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub replicates: usize,
    pub seed: u64,
    /// Default output directory; the `--out` flag wins.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthSection {
    /// Start level η₀ (the initial tree is sampled at θ = e^{-η₀}).
    pub eta0: f64,
    /// End level η₁ ≥ η₀.
    pub eta1: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BdSection {
    /// Constant per-capita birth rate.
    pub birth: f64,
    /// Constant per-capita death rate.
    pub death: f64,
    /// Census time.
    pub horizon: f64,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
        let config: RunConfig = toml::from_str(&text)
            .map_err(|e| Failure::Config(format!("invalid config {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), Failure> {
        let m = &self.model;
        if !(m.z > 0.0) || !m.z.is_finite() {
            return Err(Failure::Config("model.z must be positive and finite".into()));
        }
        if !(m.epsilon > 0.0) || m.epsilon >= m.z {
            return Err(Failure::Config(
                "model.epsilon must satisfy 0 < epsilon < z".into(),
            ));
        }
        if !(m.theta >= 0.0) || !m.theta.is_finite() {
            return Err(Failure::Config("model.theta must be finite and >= 0".into()));
        }
        if self.run.replicates == 0 {
            return Err(Failure::Config("run.replicates must be at least 1".into()));
        }
        if let Some(g) = &self.growth {
            if !(g.eta1 >= g.eta0) || !g.eta0.is_finite() || !g.eta1.is_finite() {
                return Err(Failure::Config(
                    "growth.eta0/eta1 must be finite with eta1 >= eta0".into(),
                ));
            }
        }
        if let Some(b) = &self.birth_death {
            if !(b.birth >= 0.0) || !(b.death >= 0.0) || !(b.horizon > 0.0) {
                return Err(Failure::Config(
                    "birth_death needs birth >= 0, death >= 0, horizon > 0".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn pair(&self) -> Result<MeasurePair, Failure> {
        let mu = MutationMeasure::uniform(self.model.theta)?;
        Ok(MeasurePair::new(self.model.intensity.clone(), mu))
    }

    /// Master seed: flag wins over the config.
    pub fn seed(&self, flag: Option<u64>) -> u64 {
        flag.unwrap_or(self.run.seed)
    }

    /// Output directory: flag, then config, then `runs/`.
    pub fn out_dir(&self, flag: Option<PathBuf>) -> PathBuf {
        flag.or_else(|| self.run.out.clone())
            .unwrap_or_else(|| PathBuf::from("runs"))
    }

    pub fn growth_section(&self) -> Result<&GrowthSection, Failure> {
        self.growth.as_ref().ok_or_else(|| {
            Failure::Config("missing config section [growth] (keys eta0, eta1)".into())
        })
    }

    pub fn birth_death_section(&self) -> Result<&BdSection, Failure> {
        self.birth_death.as_ref().ok_or_else(|| {
            Failure::Config("missing config section [birth_death] (keys birth, death, horizon)".into())
        })
    }
}

/// Writes pretty JSON to `dir/name`, creating the directory.
pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

/// Writes raw text to `dir/name`, creating the directory.
pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, text)?;
    Ok(path)
}
