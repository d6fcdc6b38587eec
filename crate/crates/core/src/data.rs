//! Trajectory datasets: canonical loader, per-ego sample extraction and the
//! destination / desired-speed estimators.

mod canonical;
mod convert;

pub use canonical::{
    load_dataset, read_dataset, read_records, scenario_records, write_dataset, write_records, AgentKind, AgentTrack,
    Scenario, TrajectoryRecord, VehicleDims, HEADER, MAX_TRACK_POINTS,
};
pub use convert::{convert_records, ColumnMapping, ColumnOrConst};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::model::{ObstacleShape, PedestrianState, Surroundings, VehicleState};

pub const DEFAULT_DESTINATION_EXTENSION: f64 = 5.0;
pub const DEFAULT_WALKING_THRESHOLD: f64 = 0.8;
pub const FALLBACK_DESIRED_SPEED: f64 = 1.3;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DataError {
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("time step must be > 0, got {0}")]
    InvalidTimeStep(f64),
    #[error("stationary ego: first and last points coincide")]
    StationaryEgo,
    #[error("trajectory needs at least 2 points")]
    TooShort,
    #[error("{0}")]
    Io(String),
}

/// Replayed surroundings of the ego at one grid step.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub pedestrians: Vec<PedestrianState>,
    pub vehicles: Vec<VehicleState>,
}

impl Frame {
    pub fn surroundings<'a>(&'a self, obstacles: &'a [ObstacleShape]) -> Surroundings<'a> {
        Surroundings::new(&self.pedestrians, &self.vehicles, obstacles)
    }
}

/// One ego pedestrian's ground truth with everything else replayed around it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSample {
    pub scenario_id: String,
    pub ego_id: String,
    pub dt: f64,
    /// Grid step of `ego[0]`.
    pub start_step: i64,
    /// Ground-truth positions, `k + 1` of them.
    pub ego: Vec<Vec2>,
    /// Velocity the replay starts from; the first displacement for recorded
    /// data.
    pub initial_velocity: Vec2,
    /// Surroundings at each ego step, same length as `ego`.
    pub frames: Vec<Frame>,
    #[serde(default)]
    pub obstacles: Vec<ObstacleShape>,
    pub destination: Vec2,
    pub desired_speed: f64,
}

impl DataSample {
    /// Number of steps `k`.
    pub fn steps(&self) -> usize {
        self.ego.len() - 1
    }

    pub fn initial_state(&self) -> PedestrianState {
        PedestrianState::new(self.ego[0], self.initial_velocity)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.ego.len() < 2 {
            return Err(format!("sample {}: fewer than 2 points", self.ego_id));
        }
        if self.frames.len() != self.ego.len() {
            return Err(format!(
                "sample {}: {} frames for {} points",
                self.ego_id,
                self.frames.len(),
                self.ego.len()
            ));
        }
        if !(self.dt > 0.0 && self.desired_speed > 0.0) {
            return Err(format!("sample {}: dt and desired speed must be > 0", self.ego_id));
        }
        Ok(())
    }
}

/// `p_k + l_des * (p_k - p_0) / |p_k - p_0|`
pub fn estimate_destination(ego: &[Vec2], extension: f64) -> Result<Vec2, DataError> {
    if ego.len() < 2 {
        return Err(DataError::TooShort);
    }
    let (first, last) = (ego[0], ego[ego.len() - 1]);
    let d = last - first;
    let n = d.norm();
    if n == 0.0 {
        return Err(DataError::StationaryEgo);
    }
    Ok(last + d * (extension / n))
}

/// Mean of the per-step speeds above `threshold`, or the fallback when none is.
pub fn estimate_desired_speed(ego: &[Vec2], dt: f64, threshold: f64) -> f64 {
    let fast: Vec<f64> = ego
        .windows(2)
        .map(|w| (w[1] - w[0]).norm() / dt)
        .filter(|s| *s > threshold)
        .collect();
    if fast.is_empty() {
        FALLBACK_DESIRED_SPEED
    } else {
        fast.iter().sum::<f64>() / fast.len() as f64
    }
}

fn pedestrian_at(track: &AgentTrack, i: usize, dt: f64) -> PedestrianState {
    let p = &track.positions;
    let v = match p.len() {
        1 => Vec2::zeros(),
        _ if i == 0 => (p[1] - p[0]) / dt,
        n if i == n - 1 => (p[n - 1] - p[n - 2]) / dt,
        _ => (p[i + 1] - p[i - 1]) / (2.0 * dt),
    };
    PedestrianState::new(p[i], v)
}

fn vehicle_at(track: &AgentTrack, i: usize, dt: f64) -> VehicleState {
    let p = &track.positions;
    let speed = match p.len() {
        1 => 0.0,
        n if i == n - 1 => (p[n - 1] - p[n - 2]).norm() / dt,
        _ => (p[i + 1] - p[i]).norm() / dt,
    };
    let dims = track.dims.unwrap_or(VehicleDims {
        length: 0.0,
        width: 0.0,
    });
    VehicleState {
        position: p[i],
        heading: track.headings[i],
        speed,
        center_to_front: dims.length / 2.0,
        center_to_rear: dims.length / 2.0,
        half_width: dims.width / 2.0,
    }
}

/// One sample per pedestrian present for at least two grid steps and not
/// standing still; the others are skipped with a warning.
pub fn extract_samples(scenario: &Scenario) -> Vec<DataSample> {
    let dt = scenario.dt;
    let mut out = Vec::new();
    for ego in scenario.agents.iter().filter(|a| a.kind == AgentKind::Pedestrian) {
        if ego.positions.len() < 2 {
            log::warn!("{}/{}: present for fewer than 2 steps, skipped", scenario.id, ego.id);
            continue;
        }
        let destination = match estimate_destination(&ego.positions, DEFAULT_DESTINATION_EXTENSION) {
            Ok(d) => d,
            Err(e) => {
                log::warn!("{}/{}: {e}, skipped", scenario.id, ego.id);
                continue;
            }
        };
        let frames = (ego.start_step..=ego.end_step())
            .map(|step| {
                let mut f = Frame::default();
                for other in scenario.agents.iter().filter(|a| a.id != ego.id) {
                    if let Some(i) = other.index_of(step) {
                        match other.kind {
                            AgentKind::Pedestrian => f.pedestrians.push(pedestrian_at(other, i, dt)),
                            AgentKind::Vehicle => f.vehicles.push(vehicle_at(other, i, dt)),
                        }
                    }
                }
                f
            })
            .collect();
        out.push(DataSample {
            scenario_id: scenario.id.clone(),
            ego_id: ego.id.clone(),
            dt,
            start_step: ego.start_step,
            ego: ego.positions.clone(),
            initial_velocity: (ego.positions[1] - ego.positions[0]) / dt,
            frames,
            obstacles: Vec::new(),
            destination,
            desired_speed: estimate_desired_speed(&ego.positions, dt, DEFAULT_WALKING_THRESHOLD),
        });
    }
    out
}

/// Loads every `*.csv` under `path` (or the single file `path`) and extracts
/// all samples, in file-name then scenario order.
pub fn load_samples(path: &Path, dt: f64) -> Result<Vec<DataSample>, DataError> {
    let mut samples = Vec::new();
    for file in dataset_files(path)? {
        for sc in load_dataset(&file, dt)? {
            samples.extend(extract_samples(&sc));
        }
    }
    Ok(samples)
}

/// The canonical files making up a dataset path, sorted.
pub fn dataset_files(path: &Path) -> Result<Vec<std::path::PathBuf>, DataError> {
    let io = |e: std::io::Error| DataError::Io(format!("{}: {e}", path.display()));
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<_> = std::fs::read_dir(path)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    Ok(files)
}
