use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::model::{ObstacleShape, PedestrianState, VehicleState};

use super::{SimulationError, VehiclePolicy};

/// Upper bound on recorded steps per run; guards against absurd configs.
pub const MAX_STEPS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PedestrianSpec {
    pub id: String,
    /// Flow the pedestrian belongs to, used for colouring plots.
    #[serde(default)]
    pub flow: usize,
    pub initial: PedestrianState,
    pub destination: Vec2,
    pub desired_speed: f64,
    /// Time at which the pedestrian enters the scene, s.
    #[serde(default)]
    pub release_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleSpec {
    pub id: String,
    pub initial: VehicleState,
    pub policy: VehiclePolicy,
}

/// Everything needed to run one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub pedestrians: Vec<PedestrianSpec>,
    #[serde(default)]
    pub vehicles: Vec<VehicleSpec>,
    #[serde(default)]
    pub obstacles: Vec<ObstacleShape>,
    pub t_end: f64,
    pub dt: f64,
    #[serde(default)]
    pub seed: u64,
    /// A pedestrian within this distance of its destination leaves the scene.
    #[serde(default = "default_arrival_radius")]
    pub arrival_radius: f64,
}

fn default_arrival_radius() -> f64 {
    0.3
}

impl ScenarioConfig {
    /// Number of integration steps; the result holds one more sample.
    pub fn step_count(&self) -> usize {
        (self.t_end / self.dt + 1e-9).floor() as usize
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        let bad = |msg: String| Err(SimulationError::InvalidScenario(msg));
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be > 0, got {}", self.t_end));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if self.t_end / self.dt > MAX_STEPS as f64 {
            return bad(format!("more than {MAX_STEPS} steps"));
        }
        if !(self.arrival_radius >= 0.0 && self.arrival_radius.is_finite()) {
            return bad("arrival_radius must be >= 0".into());
        }
        for p in &self.pedestrians {
            if !p.initial.is_finite() || !p.destination.iter().all(|c| c.is_finite()) {
                return bad(format!("pedestrian {}: non-finite state", p.id));
            }
            if !(p.desired_speed > 0.0 && p.desired_speed.is_finite()) {
                return bad(format!("pedestrian {}: desired speed must be > 0", p.id));
            }
            if !p.release_time.is_finite() {
                return bad(format!("pedestrian {}: non-finite release time", p.id));
            }
        }
        for v in &self.vehicles {
            v.initial
                .validate()
                .map_err(|e| SimulationError::InvalidScenario(format!("vehicle {}: {e}", v.id)))?;
            v.policy.validate()?;
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self, SimulationError> {
        let cfg: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| SimulationError::InvalidScenario(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn load(path: &Path) -> Result<Self, SimulationError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| SimulationError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }
}
