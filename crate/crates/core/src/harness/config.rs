use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::robot_model::{LimitScale, Scene, SceneDoc};
use crate::safety_gate::{GateConfig, ProtectionMode};
use crate::task_env::EpisodeConfig;

/// Named limit factor sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LimitSet {
    /// Full limits.
    A,
    /// Reduced limits.
    B,
}

impl LimitSet {
    pub fn scale(self) -> LimitScale {
        match self {
            LimitSet::A => LimitScale::A,
            LimitSet::B => LimitScale::B,
        }
    }
}

impl std::str::FromStr for LimitSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(LimitSet::A),
            "B" => Ok(LimitSet::B),
            _ => Err(Error::InvalidArgument(format!(
                "unknown limit set `{s}` (expected a or b)"
            ))),
        }
    }
}

/// Where actions come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentSpec {
    /// Independent uniform actions in [-1, 1] per joint from ChaCha8 seeded with the episode
    /// seed on stream 1 (`ChaCha8Rng::seed_from_u64(seed)` then `set_stream(1)`).
    Random,
    /// Fixed action list, one entry per decision step; the last entry repeats when the
    /// episode is longer than the script.
    Script { actions: Vec<Vec<f64>> },
}

/// Everything that determines an episode besides its seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scene: SceneDoc,
    pub limits: LimitSet,
    /// Replaces the scene's safety distance when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub safety_distance_m: Option<f64>,
    pub mode: ProtectionMode,
    pub gate: GateConfig,
    pub episode: EpisodeConfig,
    pub agent: AgentSpec,
    /// Rate at which executed trajectories are measured for pair distances.
    pub measure_hz: f64,
    /// Rate at which executed setpoints are checked against the kinematic limits.
    pub kinematics_hz: f64,
}

impl RunConfig {
    pub const DEFAULT_MEASURE_HZ: f64 = 240.0;
    pub const DEFAULT_KINEMATICS_HZ: f64 = 1000.0;

    /// Default configuration around `scene`.
    pub fn new(scene: SceneDoc, mode: ProtectionMode) -> Self {
        RunConfig {
            scene,
            limits: LimitSet::A,
            safety_distance_m: None,
            mode,
            gate: GateConfig::default(),
            episode: EpisodeConfig::default(),
            agent: AgentSpec::Random,
            measure_hz: Self::DEFAULT_MEASURE_HZ,
            kinematics_hz: Self::DEFAULT_KINEMATICS_HZ,
        }
    }

    /// Scene with the limit set and safety distance applied.
    pub fn resolve_scene(&self) -> Result<Scene> {
        let mut scene = self
            .scene
            .clone()
            .into_scene()?
            .with_limit_scale(&self.limits.scale())?;
        if let Some(s) = self.safety_distance_m {
            scene = scene.with_safety_distance(s)?;
        }
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        self.gate.validate()?;
        self.episode.validate()?;
        for (name, f) in [("measure_hz", self.measure_hz), ("kinematics_hz", self.kinematics_hz)] {
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be > 0, got {f}")));
            }
        }
        if let AgentSpec::Script { actions } = &self.agent {
            if actions.is_empty() {
                return Err(Error::InvalidArgument("action script is empty".into()));
            }
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}
