//! Engine configuration, readable from TOML. Every section and field is
//! optional and falls back to its default.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agent::AgentConfig;
use crate::creative::CreativeConfig;
use crate::error::{Error, Result};
use crate::memory::{CropPolicy, MemoryConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    /// Crop policy for the faces domain. Whole faces feed the face template.
    pub face_policy: CropPolicy,
    /// Crop policy for every other domain.
    pub domain_policy: CropPolicy,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig { face_policy: CropPolicy::Whole, domain_policy: CropPolicy::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub memory: MemoryConfig,
    pub training: TrainingConfig,
    pub creative: CreativeConfig,
    pub agent: AgentConfig,
}

impl EngineConfig {
    pub fn from_toml_str(s: &str) -> Result<EngineConfig> {
        toml::from_str(s).map_err(|e| Error::invalid(format!("config: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<EngineConfig> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::invalid(format!("config: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_toml_keeps_defaults() {
        let c = EngineConfig::from_toml_str("[creative]\nn_retry = 5\n[agent.initial]\ncompetence = 0.5\ncertainty = 0.5\n").unwrap();
        assert_eq!(c.creative.n_retry, 5);
        assert_eq!(c.creative.r_max, 8);
        assert_eq!(c.agent.initial.certainty, 0.5);
        assert_eq!(c.memory, MemoryConfig::default());
    }

    #[test]
    fn round_trip() {
        let c = EngineConfig::default();
        assert_eq!(EngineConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap(), c);
    }

    #[test]
    fn unknown_field_is_ignored_but_bad_type_is_not() {
        assert!(EngineConfig::from_toml_str("[creative]\nn_retry = \"x\"\n").is_err());
    }
}
