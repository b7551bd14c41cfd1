use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which loss terms contribute to the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossToggles {
    pub surface: bool,
    pub normal: bool,
    pub occupancy: bool,
    pub prune: bool,
}

impl Default for LossToggles {
    fn default() -> Self {
        LossToggles {
            surface: true,
            normal: true,
            occupancy: true,
            prune: true,
        }
    }
}

impl LossToggles {
    pub fn none() -> Self {
        LossToggles {
            surface: false,
            normal: false,
            occupancy: false,
            prune: false,
        }
    }

    pub fn any(&self) -> bool {
        self.surface || self.normal || self.occupancy || self.prune
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Fitting hyperparameters. Serializes to TOML; every field is optional in
/// the file and falls back to its default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub iterations: usize,
    /// Surface samples per iteration; the same number of off-surface samples
    /// is drawn. Clamped to the sample count.
    pub batch_size: usize,
    pub learning_rate: f64,
    pub adam: AdamConfig,
    /// Iterations between prune passes; 0 disables pruning.
    pub prune_interval: usize,
    pub prune_threshold: f64,
    pub prune_disable_value: f64,
    pub rho: f64,
    pub beta: f64,
    pub seed: u64,
    pub losses: LossToggles,
    /// Closed-form initialization from the samples; otherwise random slopes.
    pub geometric_init: bool,
    pub weight_norm: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            iterations: 10_000,
            batch_size: 16_384,
            learning_rate: 1e-3,
            adam: AdamConfig::default(),
            prune_interval: 2_000,
            prune_threshold: 1e-2,
            prune_disable_value: 1e-5,
            rho: 200.0,
            beta: 75.0,
            seed: 0,
            losses: LossToggles::default(),
            geometric_init: true,
            weight_norm: true,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("learning_rate", self.learning_rate),
            ("prune_threshold", self.prune_threshold),
            ("prune_disable_value", self.prune_disable_value),
            ("rho", self.rho),
            ("beta", self.beta),
            ("adam.epsilon", self.adam.epsilon),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("adam.beta1", self.adam.beta1), ("adam.beta2", self.adam.beta2)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!("{name} must lie in [0, 1), got {v}")));
            }
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be positive".into()));
        }
        if self.prune_disable_value >= self.prune_threshold {
            return Err(Error::InvalidConfig(
                "prune_disable_value must be below prune_threshold".into(),
            ));
        }
        Ok(())
    }

    pub fn pruning_enabled(&self) -> bool {
        self.prune_interval > 0
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: FitConfig = toml::from_str(s).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("FitConfig serializes to TOML")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string())?;
        Ok(())
    }
}
