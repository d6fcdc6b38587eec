use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GaConfig, GaResult, GroupModel, ThetaVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationMode {
    Universal,
    Group,
}

/// Everything needed to reproduce and audit one calibration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub mode: CalibrationMode,
    pub dataset: String,
    /// SHA-256 over the dataset files, hex.
    pub dataset_digest: String,
    pub sample_count: usize,
    pub dt: f64,
    pub ga: GaConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_ga: Option<GaConfig>,
    pub seed_theta: ThetaVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub universal: Option<GaResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<GroupModel>,
    /// Mean per-sample fitness of the calibrated model over all samples.
    pub fitness: f64,
}

impl CalibrationReport {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
