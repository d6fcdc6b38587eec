//! Trajectory metrics (aADE, aFDE, CI), the constant-velocity and ordinary
//! social force baselines, and dataset-level model comparison.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{replay_with, simulate_sample, GroupModel, ThetaVector};
use crate::data::DataSample;
use crate::geometry::{Aabb, Vec2};
use crate::model::{
    integrate_step, limit_total_force, ObstacleShape, ParameterSet, PedestrianBody, PedestrianProfile, PedestrianState,
    Surroundings, VehicleState,
};

pub const DEFAULT_K0: usize = 10;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MetricError {
    #[error("trajectory lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("trajectory needs at least 2 points")]
    TooShort,
    #[error("nothing to evaluate")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricScores {
    pub aade: f64,
    pub afde: f64,
    pub ci: f64,
}

impl MetricScores {
    /// `aADE/aFDE/CI` with three decimals.
    pub fn entry(&self) -> String {
        format!("{:.3}/{:.3}/{:.3}", self.aade, self.afde, self.ci)
    }
}

fn check(sim: &[Vec2], gt: &[Vec2]) -> Result<usize, MetricError> {
    if sim.len() != gt.len() {
        return Err(MetricError::LengthMismatch(sim.len(), gt.len()));
    }
    if sim.len() < 2 {
        return Err(MetricError::TooShort);
    }
    Ok(sim.len() - 1)
}

/// Mean displacement over steps `1..=k`, scaled by `k0 / k`.
pub fn compute_aade(sim: &[Vec2], gt: &[Vec2], k0: usize) -> Result<f64, MetricError> {
    let k = check(sim, gt)?;
    let ade = sim[1..].iter().zip(&gt[1..]).map(|(a, b)| (a - b).norm()).sum::<f64>() / k as f64;
    Ok(ade * k0 as f64 / k as f64)
}

/// Final displacement scaled by `k0 / k`.
pub fn compute_afde(sim: &[Vec2], gt: &[Vec2], k0: usize) -> Result<f64, MetricError> {
    let k = check(sim, gt)?;
    Ok((sim[k] - gt[k]).norm() * k0 as f64 / k as f64)
}

/// Fraction of points strictly inside any vehicle body of the same step.
/// `vehicles[i]` holds the vehicles at the time of `sim[i]`.
pub fn compute_ci(sim: &[Vec2], vehicles: &[Vec<VehicleState>]) -> Result<f64, MetricError> {
    if sim.len() != vehicles.len() {
        return Err(MetricError::LengthMismatch(sim.len(), vehicles.len()));
    }
    if sim.is_empty() {
        return Err(MetricError::Empty);
    }
    let inside = sim
        .iter()
        .zip(vehicles)
        .filter(|(p, vs)| vs.iter().any(|v| v.body_contains(**p)))
        .count();
    Ok(inside as f64 / sim.len() as f64)
}

/// Fraction of values strictly below each threshold.
pub fn threshold_curve(values: &[f64], thresholds: &[f64]) -> Vec<f64> {
    thresholds
        .iter()
        .map(|t| values.iter().filter(|v| *v < t).count() as f64 / values.len() as f64)
        .collect()
}

/// Walks straight at the desired speed, landing exactly on the destination in
/// the last step and stopping there.
pub fn cv_baseline_step(state: &PedestrianState, profile: &PedestrianProfile, dt: f64) -> PedestrianState {
    let to_goal = profile.destination - state.position;
    let dist = to_goal.norm();
    let velocity = if dist == 0.0 {
        Vec2::zeros()
    } else if dist > profile.desired_speed * dt {
        to_goal * (profile.desired_speed / dist)
    } else {
        to_goal / dt
    };
    PedestrianState {
        position: state.position + velocity * dt,
        velocity,
    }
}

/// Constants of the ordinary social force baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SfmParams {
    /// N
    pub strength: f64,
    /// m
    pub range: f64,
    /// s
    pub relaxation_time: f64,
    /// m
    pub radius: f64,
    /// kg
    pub mass: f64,
    /// Look-ahead used to extend the vehicle rectangle forward, s.
    pub prediction_horizon: f64,
}

impl Default for SfmParams {
    fn default() -> Self {
        Self {
            strength: 2000.0,
            range: 0.08,
            relaxation_time: 0.5,
            radius: 0.25,
            mass: 80.0,
            prediction_horizon: 2.0,
        }
    }
}

/// Rectangle a vehicle blocks in the baseline: its body stretched forward to
/// the front impact line, in the vehicle frame.
pub fn sfm_vehicle_rectangle(veh: &VehicleState, prediction_horizon: f64) -> Aabb {
    Aabb::new(
        Vec2::new(-veh.center_to_rear, -veh.half_width),
        Vec2::new(veh.front_impact_distance(prediction_horizon), veh.half_width),
    )
}

/// Boundary repulsion `A exp((R - d) / B)` away from the closest point of a
/// box; inside the box the push is out through the nearest face.
fn box_repulsion(local: Vec2, rect: &Aabb, p: &SfmParams) -> Vec2 {
    if rect.contains_strict(local) {
        let gaps = [
            (local.x - rect.min.x, Vec2::new(-1.0, 0.0)),
            (rect.max.x - local.x, Vec2::new(1.0, 0.0)),
            (local.y - rect.min.y, Vec2::new(0.0, -1.0)),
            (rect.max.y - local.y, Vec2::new(0.0, 1.0)),
        ];
        let (gap, n) = gaps.iter().min_by(|a, b| a.0.total_cmp(&b.0)).unwrap();
        return n * p.strength * ((p.radius + gap) / p.range).exp();
    }
    let q = rect.closest_point(local);
    let d = (local - q).norm();
    let n = if d > 0.0 { (local - q) / d } else { Vec2::new(1.0, 0.0) };
    n * p.strength * ((p.radius - d) / p.range).exp()
}

pub fn sfm_pedestrian_force(ego: &PedestrianState, other: &PedestrianState, p: &SfmParams) -> Vec2 {
    let diff = ego.position - other.position;
    let d = diff.norm();
    let n = if d > 0.0 { diff / d } else { Vec2::new(1.0, 0.0) };
    n * p.strength * ((2.0 * p.radius - d) / p.range).exp()
}

pub fn sfm_vehicle_force(ego: &PedestrianState, veh: &VehicleState, p: &SfmParams) -> Vec2 {
    let local = veh.to_local(ego.position);
    veh.local_dir_to_world(box_repulsion(
        local,
        &sfm_vehicle_rectangle(veh, p.prediction_horizon),
        p,
    ))
}

pub fn sfm_obstacle_force(ego: &PedestrianState, obs: &ObstacleShape, p: &SfmParams) -> Vec2 {
    let (q, _) = obs.closest_point(ego.position);
    let diff = ego.position - q;
    let d = diff.norm();
    if d == 0.0 {
        return Vec2::zeros();
    }
    diff / d * p.strength * ((p.radius - d) / p.range).exp()
}

/// Relaxation toward the desired velocity plus exponential repulsion, no
/// friction; limited like the sub-goal model.
pub fn sfm_baseline_step(
    state: &PedestrianState,
    profile: &PedestrianProfile,
    surroundings: &Surroundings<'_>,
    p: &SfmParams,
    dt: f64,
) -> PedestrianState {
    let to_goal = profile.destination - state.position;
    let dist = to_goal.norm();
    let desired = if dist > 0.0 {
        to_goal * (profile.desired_speed / dist)
    } else {
        Vec2::zeros()
    };
    let mut force = (desired - state.velocity) * (p.mass / p.relaxation_time);
    for o in surroundings.pedestrians {
        force += sfm_pedestrian_force(state, o, p);
    }
    for v in surroundings.vehicles {
        force += sfm_vehicle_force(state, v, p);
    }
    for o in surroundings.obstacles {
        force += sfm_obstacle_force(state, o, p);
    }
    let sfm_profile = PedestrianProfile {
        body: PedestrianBody {
            mass: p.mass,
            radius: p.radius,
            ..profile.body
        },
        ..*profile
    };
    let limited = limit_total_force(force, state.velocity, &sfm_profile, dt);
    integrate_step(state, limited, p.mass, dt)
}

/// What to simulate each sample with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Model {
    /// Replays the recording itself.
    GroundTruth,
    ConstantVelocity,
    SocialForce {
        params: SfmParams,
    },
    SubGoal {
        theta: ThetaVector,
    },
    /// Each sample under the vector of its group.
    Groups {
        model: GroupModel,
    },
}

impl Model {
    pub fn label(&self) -> &'static str {
        match self {
            Model::GroundTruth => "GT",
            Model::ConstantVelocity => "CV",
            Model::SocialForce { .. } => "SFM",
            Model::SubGoal { .. } => "SG-SFM-u",
            Model::Groups { .. } => "SG-SFM-g",
        }
    }

    /// Simulated ego trajectory of sample `index`.
    pub fn simulate(&self, index: usize, sample: &DataSample, base: &ParameterSet) -> Vec<Vec2> {
        let profile = PedestrianProfile::new(base.body, sample.desired_speed, sample.destination);
        match self {
            Model::GroundTruth => sample.ego.clone(),
            Model::ConstantVelocity => replay_with(sample, |s, _| cv_baseline_step(s, &profile, sample.dt)),
            Model::SocialForce { params } => {
                replay_with(sample, |s, sur| sfm_baseline_step(s, &profile, sur, params, sample.dt))
            }
            Model::SubGoal { theta } => simulate_sample(theta, sample, base),
            Model::Groups { model } => simulate_sample(model.theta_for(index), sample, base),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleScores {
    pub scenario_id: String,
    pub ego_id: String,
    pub steps: usize,
    pub scores: MetricScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub model: String,
    pub k0: usize,
    /// Means over samples.
    pub scores: MetricScores,
    pub samples: Vec<SampleScores>,
}

impl Evaluation {
    pub fn aade_values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.scores.aade).collect()
    }
}

pub fn sample_vehicles(sample: &DataSample) -> Vec<Vec<VehicleState>> {
    sample.frames.iter().map(|f| f.vehicles.clone()).collect()
}

pub fn score_trajectory(sim: &[Vec2], sample: &DataSample, k0: usize) -> Result<MetricScores, MetricError> {
    Ok(MetricScores {
        aade: compute_aade(sim, &sample.ego, k0)?,
        afde: compute_afde(sim, &sample.ego, k0)?,
        ci: compute_ci(sim, &sample_vehicles(sample))?,
    })
}

/// Scores `model` on every sample and averages; order-fixed reduction.
pub fn evaluate_model(
    model: &Model,
    samples: &[DataSample],
    base: &ParameterSet,
    k0: usize,
) -> Result<Evaluation, MetricError> {
    if samples.is_empty() {
        return Err(MetricError::Empty);
    }
    let per: Vec<SampleScores> = samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let sim = model.simulate(i, s, base);
            score_trajectory(&sim, s, k0).map(|scores| SampleScores {
                scenario_id: s.scenario_id.clone(),
                ego_id: s.ego_id.clone(),
                steps: s.steps(),
                scores,
            })
        })
        .collect::<Result<_, _>>()?;
    let n = per.len() as f64;
    let mean = |f: fn(&MetricScores) -> f64| per.iter().map(|s| f(&s.scores)).sum::<f64>() / n;
    Ok(Evaluation {
        model: model.label().to_string(),
        k0,
        scores: MetricScores {
            aade: mean(|s| s.aade),
            afde: mean(|s| s.afde),
            ci: mean(|s| s.ci),
        },
        samples: per,
    })
}

/// Plain-text table with one row per model and one column per dataset.
pub fn render_table(datasets: &[String], rows: &[(String, Vec<MetricScores>)]) -> String {
    let mut out = format!("{:<10}", "model");
    for d in datasets {
        out += &format!(" {d:>19}");
    }
    out.push('\n');
    for (name, scores) in rows {
        out += &format!("{name:<10}");
        for s in scores {
            out += &format!(" {:>19}", s.entry());
        }
        out.push('\n');
    }
    out
}
