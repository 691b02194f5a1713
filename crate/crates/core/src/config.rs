use serde::{Deserialize, Serialize};

use crate::dynamics::QuadrotorLimits;
use crate::error::{Error, Result};
use crate::shotgen::ShotConfig;
use crate::simkit::FollowerGains;
use crate::transition::TransitionConfig;

/// Planner settings shared by the CLI and the session service. `limits`
/// overrides the copy inside `transition`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub shot: ShotConfig,
    pub transition: TransitionConfig,
    pub limits: Option<QuadrotorLimits>,
    pub follower: FollowerGains,
}

impl EngineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: EngineConfig = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))?;
        cfg.limits().validate()?;
        Ok(cfg)
    }

    pub fn limits(&self) -> QuadrotorLimits {
        self.limits.clone().unwrap_or_else(|| self.transition.limits.clone())
    }

    pub fn transition_config(&self) -> TransitionConfig {
        TransitionConfig {
            limits: self.limits(),
            ..self.transition.clone()
        }
    }

    /// Canonical JSON with defaults filled in.
    pub fn canonical_json(&self) -> String {
        let resolved = EngineConfig {
            limits: Some(self.limits()),
            transition: self.transition_config(),
            ..self.clone()
        };
        serde_json::to_string(&resolved).expect("config serializes")
    }
}
