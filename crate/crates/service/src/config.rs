use std::path::Path;

use cinequad_core::simkit::TrackerModel;
use cinequad_core::{EngineConfig, Error, Result, ShotSpec, ShotType, SubjectId};
use serde::{Deserialize, Serialize};

pub const ENV_BIND: &str = "CINEQUAD_BIND";
pub const ENV_TICK_RATE: &str = "CINEQUAD_TICK_RATE";
pub const ENV_SPEEDUP: &str = "CINEQUAD_SPEEDUP";
pub const ENV_SEED: &str = "SIM_SEED";

/// Per-session planner and simulation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub engine: EngineConfig,
    /// Extra clearance added to every safety radius when planning, meters.
    /// Absorbs the follower's tracking error.
    pub planning_margin: f64,
    /// Simulation steps per simulated second.
    pub tick_rate: f64,
    /// Shot held when the session starts.
    pub initial_shot: ShotSpec,
    /// Plan from noisy subject estimates instead of the true positions.
    pub perception: Option<TrackerModel>,
    pub seed: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            engine: EngineConfig::default(),
            planning_margin: 0.1,
            tick_rate: 50.0,
            initial_shot: ShotSpec::new(ShotType::Apex, SubjectId::A),
            perception: None,
            seed: 0,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        // the follower integrates with dt ≤ 0.1 s
        if !(self.tick_rate >= 10.0 && self.tick_rate.is_finite()) {
            return Err(Error::InvalidInput(format!("tick rate {} must be at least 10 Hz", self.tick_rate)));
        }
        if !(self.planning_margin >= 0.0) {
            return Err(Error::InvalidInput("planning margin must be non-negative".into()));
        }
        self.engine.limits().validate()?;
        self.initial_shot.validate()?;
        if let Some(p) = &self.perception {
            p.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub bind: String,
    /// Simulated seconds per wall-clock second.
    pub speedup: f64,
    /// Telemetry messages buffered per subscriber before it starts skipping.
    pub telemetry_buffer: usize,
    pub session: SessionConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bind: "127.0.0.1:8080".into(),
            speedup: 1.0,
            telemetry_buffer: 1024,
            session: SessionConfig::default(),
        }
    }
}

impl ServiceConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("service config: {e}")))
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::InvalidInput(format!("{}: {e}", p.display())))?;
                Self::from_json(&text)?
            }
            None => Self::default(),
        };
        cfg.apply_env(|k| std::env::var(k).ok())?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Overrides from `CINEQUAD_BIND`, `CINEQUAD_TICK_RATE`,
    /// `CINEQUAD_SPEEDUP` and `SIM_SEED`.
    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("{key}: cannot parse `{value}`")))
        }
        if let Some(v) = var(ENV_BIND) {
            self.bind = v;
        }
        if let Some(v) = var(ENV_TICK_RATE) {
            self.session.tick_rate = parse(ENV_TICK_RATE, &v)?;
        }
        if let Some(v) = var(ENV_SPEEDUP) {
            self.speedup = parse(ENV_SPEEDUP, &v)?;
        }
        if let Some(v) = var(ENV_SEED) {
            self.session.seed = parse(ENV_SEED, &v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.speedup > 0.0 && self.speedup.is_finite()) {
            return Err(Error::InvalidInput("speedup must be positive".into()));
        }
        if self.telemetry_buffer == 0 {
            return Err(Error::InvalidInput("telemetry buffer must be positive".into()));
        }
        self.session.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn env_overrides_file_values() {
        let mut cfg = ServiceConfig::default();
        let env = |k: &str| match k {
            ENV_BIND => Some("0.0.0.0:9000".to_string()),
            ENV_TICK_RATE => Some("100".to_string()),
            ENV_SEED => Some("42".to_string()),
            _ => None,
        };
        cfg.apply_env(env).unwrap();
        assert_eq!(cfg.bind, "0.0.0.0:9000");
        assert_eq!(cfg.session.tick_rate, 100.0);
        assert_eq!(cfg.session.seed, 42);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn bad_values_are_rejected() {
        let mut cfg = ServiceConfig::default();
        assert!(cfg.apply_env(|k| (k == ENV_SEED).then(|| "abc".to_string())).is_err());
        cfg.session.tick_rate = 5.0;
        assert!(cfg.validate().is_err());
        assert!(ServiceConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }
}
