//! Model-generated samples for checking that calibration recovers a known
//! parameter vector.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{DataSample, Frame};
use crate::geometry::{unit, Vec2};
use crate::model::{ParameterSet, PedestrianState, VehicleState};

use super::{simulate_sample, ThetaVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub count: usize,
    pub seed: u64,
    pub dt: f64,
    pub min_steps: usize,
    pub max_steps: usize,
    /// Replayed background walkers per sample, drawn from `0..=max_others`.
    pub max_others: usize,
    /// Range the ego desired speed is drawn from.
    pub desired_speed: (f64, f64),
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            count: 100,
            seed: 0,
            dt: 0.5,
            min_steps: 20,
            max_steps: 30,
            max_others: 3,
            desired_speed: (1.1, 1.5),
        }
    }
}

/// Rebuilds `template`'s ego track by simulating it under `theta`; the
/// surroundings, start, destination and desired speed are kept.
pub fn synthesize_sample(theta: &ThetaVector, base: &ParameterSet, template: &DataSample) -> DataSample {
    let ego = simulate_sample(theta, template, base);
    DataSample {
        ego,
        ..template.clone()
    }
}

/// An ego crossing a road at `y = 0` while a car passes, with a few
/// constant-velocity walkers around.
fn template(index: usize, cfg: &SyntheticConfig, rng: &mut ChaCha8Rng) -> DataSample {
    let steps = rng.random_range(cfg.min_steps..=cfg.max_steps.max(cfg.min_steps));
    let start = Vec2::new(rng.random_range(-3.0..3.0), rng.random_range(-9.0..-7.0));
    let dir = unit(FRAC_PI_2 + rng.random_range(-0.3..0.3));
    let v_d = rng.random_range(cfg.desired_speed.0..=cfg.desired_speed.1);
    let car_speed = rng.random_range(2.0..4.0);
    let arrival = rng.random_range(2.0..9.0);
    let car0 = Vec2::new(start.x - car_speed * arrival, 0.0);
    let others: Vec<(Vec2, Vec2)> = (0..rng.random_range(0..=cfg.max_others))
        .map(|_| {
            let p = Vec2::new(rng.random_range(-6.0..6.0), rng.random_range(-10.0..10.0));
            let v = unit(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)) * rng.random_range(0.8..1.6);
            (p, v)
        })
        .collect();
    let frames = (0..=steps)
        .map(|k| {
            let t = k as f64 * cfg.dt;
            Frame {
                pedestrians: others
                    .iter()
                    .map(|(p, v)| PedestrianState::new(p + v * t, *v))
                    .collect(),
                vehicles: vec![VehicleState {
                    position: car0 + Vec2::new(car_speed * t, 0.0),
                    heading: 0.0,
                    speed: car_speed,
                    center_to_front: 2.25,
                    center_to_rear: 2.25,
                    half_width: 0.9,
                }],
            }
        })
        .collect();
    DataSample {
        scenario_id: "synthetic".into(),
        ego_id: format!("syn{index:04}"),
        dt: cfg.dt,
        start_step: 0,
        ego: vec![start; steps + 1],
        initial_velocity: dir * v_d,
        frames,
        obstacles: vec![],
        destination: start + dir * 25.0,
        desired_speed: v_d,
    }
}

/// `cfg.count` samples whose ego tracks come from the model under `theta`.
pub fn synthetic_dataset(theta: &ThetaVector, base: &ParameterSet, cfg: &SyntheticConfig) -> Vec<DataSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.count)
        .map(|i| synthesize_sample(theta, base, &template(i, cfg, &mut rng)))
        .collect()
}
