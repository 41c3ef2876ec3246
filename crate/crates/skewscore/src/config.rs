//! Run configuration: a flat JSON file with every default materialized on
//! write, so emitted numbers are self-describing and a run can be
//! reproduced from its echoed config alone.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::datagen::{Formulation, NoiseFamily};
use crate::error::{Error, Result};
use crate::ordering::OddTestFunction;
use crate::score::{SsmConfig, SteinConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Setting {
    Bivariate,
    LatentTriangular,
    Multivariate,
    MultivariateConfounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Stein,
    Ssm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub setting: Setting,
    pub formulation: Formulation,
    pub noise: NoiseFamily,
    /// Node count (2 for the pairwise settings).
    pub d: usize,
    pub n: usize,
    /// Expected edge count of the random graph in multivariate settings.
    pub edges: usize,
    /// Cause-effect coupling strength in the latent-triangular setting.
    pub lambda: f64,
    /// Pairwise confounding probability in the confounded setting.
    pub rho: f64,
    pub estimator: EstimatorKind,
    pub stein: SteinConfig,
    pub ssm: SsmConfig,
    pub psi: OddTestFunction,
    pub alpha: f64,
    /// Rows used per conditional independence test.
    pub ci_subsample: usize,
    pub seeds: Vec<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            setting: Setting::Bivariate,
            formulation: Formulation::GpSig,
            noise: NoiseFamily::Gaussian,
            d: 2,
            n: 5000,
            edges: 2,
            lambda: 1.0,
            rho: 0.2,
            estimator: EstimatorKind::Stein,
            stein: SteinConfig::default(),
            ssm: SsmConfig::default(),
            psi: OddTestFunction::default(),
            alpha: 0.05,
            ci_subsample: 1000,
            seeds: vec![0],
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Parameter("seed list must be nonempty".into()));
        }
        if self.d < 1 || self.n < 1 {
            return Err(Error::Parameter("d and n must be >= 1".into()));
        }
        if matches!(self.setting, Setting::Bivariate | Setting::LatentTriangular) && self.d != 2 {
            return Err(Error::Parameter("pairwise settings require d = 2".into()));
        }
        if !(0.0 < self.alpha && self.alpha < 1.0) {
            return Err(Error::Parameter(format!("alpha must be in (0, 1), got {}", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::Parameter(format!("rho must be in [0, 1], got {}", self.rho)));
        }
        if self.lambda < 0.0 {
            return Err(Error::Parameter(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        self.psi.validate()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Writes the config with every default materialized.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn setting_label(&self) -> String {
        let base = match self.setting {
            Setting::Bivariate => "bivariate",
            Setting::LatentTriangular => "latent-triangular",
            Setting::Multivariate => "multivariate",
            Setting::MultivariateConfounded => "multivariate-confounded",
        };
        format!("{base}-d{}-n{}", self.d, self.n)
    }

    pub fn estimator_label(&self) -> &'static str {
        match self.estimator {
            EstimatorKind::Stein => "stein",
            EstimatorKind::Ssm => "ssm",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_materializes_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        // A sparse config relying on defaults everywhere.
        fs::write(&path, r#"{"setting": "multivariate", "d": 5, "seeds": [1, 2]}"#).unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.d, 5);
        assert_eq!(cfg.alpha, 0.05);
        let echo = dir.path().join("echo.json");
        cfg.save(&echo).unwrap();
        let again = RunConfig::load(&echo).unwrap();
        assert_eq!(cfg, again);
        let text = fs::read_to_string(&echo).unwrap();
        assert!(text.contains("\"alpha\""), "defaults not materialized");
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = RunConfig { seeds: vec![], ..RunConfig::default() };
        assert!(cfg.validate().is_err());
        cfg.seeds = vec![0];
        cfg.alpha = 1.5;
        assert!(cfg.validate().is_err());
        cfg.alpha = 0.05;
        cfg.setting = Setting::Bivariate;
        cfg.d = 3;
        assert!(cfg.validate().is_err());
    }
}
