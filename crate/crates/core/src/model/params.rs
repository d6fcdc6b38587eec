use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ModelError, PedestrianBody};

/// Tunable constants of the sub-goal social force model.
///
/// Seven of these (`ped_decay`, `veh_decay`, `prediction_horizon`,
/// `longitudinal_buffer`, `nav_gain`, `direction_count`, `nav_range`) are the
/// calibrated vector; the rest stay at their tuned values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// `M_ped`, N
    pub ped_strength: f64,
    /// `M_veh`, N
    pub veh_strength: f64,
    /// `M_obs`, N
    pub obs_strength: f64,
    /// `beta_ped`, 1/m
    pub ped_decay: f64,
    /// `beta_veh`, 1/m
    pub veh_decay: f64,
    /// `beta_obs`, 1/m
    pub obs_decay: f64,
    /// `alpha_ped`, weight of a pedestrian directly behind
    pub ped_anisotropy: f64,
    /// `tau_x`, s
    pub prediction_horizon: f64,
    /// `d_x`, m
    pub longitudinal_buffer: f64,
    /// `K_nav`, kg/s
    pub nav_gain: f64,
    /// `sigma`, m
    pub target_softening: f64,
    /// `N_j`, even
    pub direction_count: u32,
    /// `r_nav`, rad
    pub direction_spacing: f64,
    /// `d_nav`, m
    pub nav_range: f64,
    /// Horizon of the swept-disc occupancy predicted for other pedestrians, s.
    pub occupancy_horizon: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            ped_strength: 1700.0,
            veh_strength: 3400.0,
            obs_strength: 1700.0,
            ped_decay: 2.0,
            veh_decay: 1.5,
            obs_decay: 2.0,
            ped_anisotropy: 0.3,
            prediction_horizon: 2.0,
            longitudinal_buffer: 0.5,
            nav_gain: 500.0,
            target_softening: 0.5,
            direction_count: 90,
            direction_spacing: PI / 90.0,
            nav_range: 3.0,
            occupancy_horizon: 1.0,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("ped_strength", self.ped_strength),
            ("veh_strength", self.veh_strength),
            ("obs_strength", self.obs_strength),
            ("ped_decay", self.ped_decay),
            ("veh_decay", self.veh_decay),
            ("obs_decay", self.obs_decay),
            ("prediction_horizon", self.prediction_horizon),
            ("longitudinal_buffer", self.longitudinal_buffer),
            ("nav_gain", self.nav_gain),
            ("target_softening", self.target_softening),
            ("direction_spacing", self.direction_spacing),
            ("nav_range", self.nav_range),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ModelError::InvalidParams(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !(self.occupancy_horizon >= 0.0 && self.occupancy_horizon.is_finite()) {
            return Err(ModelError::InvalidParams("occupancy_horizon must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.ped_anisotropy) {
            return Err(ModelError::InvalidParams("ped_anisotropy must lie in [0, 1]".into()));
        }
        if self.direction_count < 2 || self.direction_count % 2 != 0 {
            return Err(ModelError::InvalidParams(format!(
                "direction_count must be even and >= 2, got {}",
                self.direction_count
            )));
        }
        Ok(())
    }
}

/// Everything a parameter file carries: model constants plus the pedestrian
/// body defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ParameterSet {
    pub model: ModelParams,
    pub body: PedestrianBody,
}

/// Flat on-disk layout: one key per field, unknown keys rejected, missing
/// keys defaulted.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ParameterFile {
    ped_strength: f64,
    veh_strength: f64,
    obs_strength: f64,
    ped_decay: f64,
    veh_decay: f64,
    obs_decay: f64,
    ped_anisotropy: f64,
    prediction_horizon: f64,
    longitudinal_buffer: f64,
    nav_gain: f64,
    target_softening: f64,
    direction_count: u32,
    direction_spacing: f64,
    nav_range: f64,
    occupancy_horizon: f64,
    mass: f64,
    radius: f64,
    max_accel: f64,
    max_speed: f64,
}

impl Default for ParameterFile {
    fn default() -> Self {
        ParameterSet::default().into()
    }
}

impl From<ParameterSet> for ParameterFile {
    fn from(p: ParameterSet) -> Self {
        let m = p.model;
        let b = p.body;
        Self {
            ped_strength: m.ped_strength,
            veh_strength: m.veh_strength,
            obs_strength: m.obs_strength,
            ped_decay: m.ped_decay,
            veh_decay: m.veh_decay,
            obs_decay: m.obs_decay,
            ped_anisotropy: m.ped_anisotropy,
            prediction_horizon: m.prediction_horizon,
            longitudinal_buffer: m.longitudinal_buffer,
            nav_gain: m.nav_gain,
            target_softening: m.target_softening,
            direction_count: m.direction_count,
            direction_spacing: m.direction_spacing,
            nav_range: m.nav_range,
            occupancy_horizon: m.occupancy_horizon,
            mass: b.mass,
            radius: b.radius,
            max_accel: b.max_accel,
            max_speed: b.max_speed,
        }
    }
}

impl From<ParameterFile> for ParameterSet {
    fn from(f: ParameterFile) -> Self {
        Self {
            model: ModelParams {
                ped_strength: f.ped_strength,
                veh_strength: f.veh_strength,
                obs_strength: f.obs_strength,
                ped_decay: f.ped_decay,
                veh_decay: f.veh_decay,
                obs_decay: f.obs_decay,
                ped_anisotropy: f.ped_anisotropy,
                prediction_horizon: f.prediction_horizon,
                longitudinal_buffer: f.longitudinal_buffer,
                nav_gain: f.nav_gain,
                target_softening: f.target_softening,
                direction_count: f.direction_count,
                direction_spacing: f.direction_spacing,
                nav_range: f.nav_range,
                occupancy_horizon: f.occupancy_horizon,
            },
            body: PedestrianBody {
                mass: f.mass,
                radius: f.radius,
                max_accel: f.max_accel,
                max_speed: f.max_speed,
            },
        }
    }
}

impl Serialize for ParameterSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ParameterFile::from(*self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ParameterSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        ParameterFile::deserialize(d).map(Into::into)
    }
}

impl ParameterSet {
    pub fn validate(&self) -> Result<(), ModelError> {
        self.model.validate()?;
        let b = &self.body;
        let ok = [b.mass, b.radius, b.max_accel, b.max_speed]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(ModelError::InvalidParams(format!(
                "pedestrian body values must be positive: {b:?}"
            )))
        }
    }

    /// Parses and validates a parameter document.
    pub fn from_json_str(text: &str) -> Result<Self, ModelError> {
        let set: ParameterSet = serde_json::from_str(text).map_err(|e| ModelError::ParamFile(e.to_string()))?;
        set.validate()?;
        Ok(set)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("parameter set serializes")
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ModelError::ParamFile(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        std::fs::write(path, self.to_json_string() + "\n")
            .map_err(|e| ModelError::ParamFile(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        ParameterSet::default().validate().unwrap();
    }

    #[test]
    fn missing_keys_use_defaults() {
        let p = ParameterSet::from_json_str(r#"{"ped_decay": 2.5, "mass": 80}"#).unwrap();
        assert_eq!(p.model.ped_decay, 2.5);
        assert_eq!(p.body.mass, 80.0);
        assert_eq!(p.model.veh_strength, ModelParams::default().veh_strength);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = ParameterSet::from_json_str(r#"{"friction": 1.0}"#).unwrap_err();
        assert!(err.to_string().contains("friction"), "{err}");
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(ParameterSet::from_json_str(r#"{"direction_count": 81}"#).is_err());
        assert!(ParameterSet::from_json_str(r#"{"ped_anisotropy": 1.5}"#).is_err());
        assert!(ParameterSet::from_json_str(r#"{"nav_gain": -1}"#).is_err());
        assert!(ParameterSet::from_json_str(r#"{"radius": 0}"#).is_err());
    }

    #[test]
    fn file_round_trip() {
        let mut p = ParameterSet::default();
        p.model.nav_gain = 345.25;
        p.model.direction_count = 100;
        let back = ParameterSet::from_json_str(&p.to_json_string()).unwrap();
        assert_eq!(back, p);
    }
}
