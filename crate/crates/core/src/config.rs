//! Run configuration documents and digests.

use crate::dataset::DatasetConfig;
use crate::net::{NetworkConfig, TrainingConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;
use thiserror::Error;

/// SHA-256 (hex) of the JSON serialization of `value`.
pub fn digest_of<T: Serialize + ?Sized>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("config serializes to JSON");
    hex::encode(Sha256::digest(&json))
}

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot parse configuration: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenerationConfig {
    pub first_seed: u64,
    /// Number of simulation seeds tried; rejected seeds yield no samples.
    pub seed_count: u64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            first_seed: 0,
            seed_count: 40,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    pub repetitions: usize,
    /// Grid side used when no checkpoint is given.
    pub grid_n: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            repetitions: 20,
            grid_n: 64,
        }
    }
}

/// Top-level configuration document (TOML). Every section is optional
/// and defaults to the desk-scale settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub schema_version: u32,
    /// Worker threads; 0 uses all cores.
    pub threads: usize,
    /// Single worker thread and fixed reduction order.
    pub deterministic: bool,
    pub generation: GenerationConfig,
    pub dataset: DatasetConfig,
    pub network: NetworkConfig,
    pub training: TrainingConfig,
    pub bench: BenchConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            threads: 0,
            deterministic: false,
            generation: GenerationConfig::default(),
            dataset: DatasetConfig::default(),
            network: NetworkConfig::desk(32),
            training: TrainingConfig::default(),
            bench: BenchConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.schema_version != SCHEMA_VERSION {
            return invalid(format!("schema_version {} (supported: {SCHEMA_VERSION})", self.schema_version));
        }
        self.dataset.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.network.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.network.grid_n != self.dataset.grid_n {
            return invalid(format!(
                "network grid_n {} differs from dataset grid_n {}",
                self.network.grid_n, self.dataset.grid_n
            ));
        }
        self.training
            .validate(&self.network)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.bench.repetitions == 0 || self.bench.grid_n % (1 << (self.network.levels() - 1)) != 0 {
            return invalid("bench needs repetitions > 0 and a grid side divisible by the pooling factor".into());
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        digest_of(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_roundtrips_through_toml() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_and_bad_versions_are_rejected() {
        assert!(RunConfig::from_toml("schema_version = 1\nbogus = 3\n").is_err());
        assert!(RunConfig::from_toml("schema_version = 1\n[training]\nlr = 3\n").is_err());
        assert!(RunConfig::from_toml("schema_version = 2\n").is_err());
        let partial = RunConfig::from_toml("schema_version = 1\n[generation]\nseed_count = 3\n").unwrap();
        assert_eq!(partial.generation.seed_count, 3);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let mut cfg = RunConfig::default();
        cfg.network.grid_n = 64;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn digest_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.training.seed = 1;
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest(), RunConfig::default().digest());
    }
}
