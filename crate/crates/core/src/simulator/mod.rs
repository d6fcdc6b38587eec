//! Collective-motion process: all pedestrians step synchronously on the
//! state frozen at time `t`, then the vehicles advance by their policies.

mod fundamental;
mod policy;
mod scenario;

pub use fundamental::{
    build_fundamental_scenarios, build_fundamental_scenarios_seeded, fundamental_scenario, Category, FUNDAMENTAL_COUNT,
};
pub use policy::{pure_pursuit_step, replay_state, PurePursuit, TimedPose, VehiclePolicy};
pub use scenario::{PedestrianSpec, ScenarioConfig, VehicleSpec, MAX_STEPS};

use serde::{Deserialize, Serialize};

use crate::model::{
    pedestrian_model_step, ParameterSet, PedestrianProfile, PedestrianState, Surroundings, VehicleState,
};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SimulationError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid vehicle policy: {0}")]
    InvalidPolicy(String),
    #[error("non-finite state for {agent} at step {step}")]
    NonFinite { agent: String, step: usize },
    #[error("{0}")]
    Io(String),
}

/// Trajectories of every agent at `dt` spacing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub times: Vec<f64>,
    pub pedestrians: Vec<Vec<PedestrianState>>,
    pub vehicles: Vec<Vec<VehicleState>>,
    /// Whether a pedestrian was ever strictly inside a vehicle body.
    pub collisions: Vec<bool>,
    /// Step at which each pedestrian reached its destination.
    pub arrivals: Vec<Option<usize>>,
}

impl SimulationResult {
    /// Fraction of recorded points of pedestrian `i` inside a vehicle body.
    pub fn collision_index(&self, i: usize) -> f64 {
        let traj = &self.pedestrians[i];
        let inside = traj
            .iter()
            .enumerate()
            .filter(|(k, s)| self.vehicles.iter().any(|v| v[*k].body_contains(s.position)))
            .count();
        inside as f64 / traj.len() as f64
    }
}

/// Runs a scenario from `t = 0` to `t_end`.
pub fn run_process(config: &ScenarioConfig, params: &ParameterSet) -> Result<SimulationResult, SimulationError> {
    config.validate()?;
    params
        .validate()
        .map_err(|e| SimulationError::InvalidScenario(e.to_string()))?;
    let steps = config.step_count();
    let dt = config.dt;
    let profiles: Vec<PedestrianProfile> = config
        .pedestrians
        .iter()
        .map(|p| PedestrianProfile::new(params.body, p.desired_speed, p.destination))
        .collect();

    let mut peds: Vec<PedestrianState> = config.pedestrians.iter().map(|p| p.initial).collect();
    let mut vehs: Vec<VehicleState> = config
        .vehicles
        .iter()
        .map(|v| v.policy.initial_state(&v.initial))
        .collect();
    let mut arrivals: Vec<Option<usize>> = vec![None; peds.len()];

    let mut result = SimulationResult {
        times: Vec::with_capacity(steps + 1),
        pedestrians: peds.iter().map(|s| vec![*s]).collect(),
        vehicles: vehs.iter().map(|s| vec![*s]).collect(),
        collisions: vec![false; peds.len()],
        arrivals: Vec::new(),
    };
    result.times.push(0.0);
    fn mark_collisions(peds: &[PedestrianState], vehs: &[VehicleState], flags: &mut [bool]) {
        for (i, p) in peds.iter().enumerate() {
            if vehs.iter().any(|v| v.body_contains(p.position)) {
                flags[i] = true;
            }
        }
    }
    mark_collisions(&peds, &vehs, &mut result.collisions);

    let mut others: Vec<PedestrianState> = Vec::with_capacity(peds.len());
    for step in 0..steps {
        let t = step as f64 * dt;
        let present: Vec<bool> = config
            .pedestrians
            .iter()
            .zip(&arrivals)
            .map(|(p, a)| a.is_none() && p.release_time <= t + 1e-9)
            .collect();
        let mut next = peds.clone();
        for i in 0..peds.len() {
            if !present[i] {
                continue;
            }
            others.clear();
            others.extend((0..peds.len()).filter(|j| *j != i && present[*j]).map(|j| peds[j]));
            let s = Surroundings::new(&others, &vehs, &config.obstacles);
            let new_state = pedestrian_model_step(&peds[i], &profiles[i], &s, &params.model, dt);
            if !new_state.is_finite() {
                return Err(SimulationError::NonFinite {
                    agent: config.pedestrians[i].id.clone(),
                    step: step + 1,
                });
            }
            next[i] = new_state;
        }
        for (i, s) in next.iter_mut().enumerate() {
            if present[i] && (s.position - profiles[i].destination).norm() <= config.arrival_radius {
                arrivals[i] = Some(step + 1);
                s.velocity = crate::geometry::Vec2::zeros();
            }
        }
        peds = next;
        for (v, spec) in vehs.iter_mut().zip(&config.vehicles) {
            *v = spec.policy.advance(v, t + dt, dt);
            if !v.position.iter().all(|c| c.is_finite()) || !v.heading.is_finite() {
                return Err(SimulationError::NonFinite {
                    agent: spec.id.clone(),
                    step: step + 1,
                });
            }
        }
        mark_collisions(&peds, &vehs, &mut result.collisions);
        result.times.push((step + 1) as f64 * dt);
        for (traj, s) in result.pedestrians.iter_mut().zip(&peds) {
            traj.push(*s);
        }
        for (traj, s) in result.vehicles.iter_mut().zip(&vehs) {
            traj.push(*s);
        }
    }
    result.arrivals = arrivals;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;

    fn walker(id: &str, from: Vec2, to: Vec2) -> PedestrianSpec {
        PedestrianSpec {
            id: id.into(),
            flow: 0,
            initial: PedestrianState::at_rest(from),
            destination: to,
            desired_speed: 1.3,
            release_time: 0.0,
        }
    }

    fn config(pedestrians: Vec<PedestrianSpec>, vehicles: Vec<VehicleSpec>) -> ScenarioConfig {
        ScenarioConfig {
            name: "test".into(),
            description: String::new(),
            pedestrians,
            vehicles,
            obstacles: vec![],
            t_end: 20.0,
            dt: 0.5,
            seed: 0,
            arrival_radius: 0.3,
        }
    }

    fn car() -> VehicleSpec {
        VehicleSpec {
            id: "car".into(),
            initial: VehicleState {
                position: Vec2::new(-20.0, 0.0),
                heading: 0.0,
                speed: 2.0,
                center_to_front: 2.25,
                center_to_rear: 2.25,
                half_width: 0.9,
            },
            policy: VehiclePolicy::PurePursuit(PurePursuit::new(
                vec![Vec2::new(-30.0, 0.0), Vec2::new(60.0, 0.0)],
                2.0,
            )),
        }
    }

    #[test]
    fn zero_pedestrians_only_vehicles() {
        let r = run_process(&config(vec![], vec![car()]), &ParameterSet::default()).unwrap();
        assert!(r.pedestrians.is_empty());
        assert_eq!(r.vehicles[0].len(), 41);
        assert_eq!(r.times.len(), 41);
    }

    #[test]
    fn trajectories_share_length() {
        let cfg = config(
            vec![walker("a", Vec2::new(0.0, -5.0), Vec2::new(0.0, 5.0))],
            vec![car()],
        );
        let r = run_process(&cfg, &ParameterSet::default()).unwrap();
        assert_eq!(r.pedestrians[0].len(), cfg.step_count() + 1);
        assert_eq!(r.vehicles[0].len(), cfg.step_count() + 1);
    }

    #[test]
    fn deterministic() {
        let cfg = config(
            vec![
                walker("a", Vec2::new(-5.0, 0.0), Vec2::new(5.0, 0.0)),
                walker("b", Vec2::new(5.0, 0.1), Vec2::new(-5.0, 0.1)),
            ],
            vec![car()],
        );
        let p = ParameterSet::default();
        assert_eq!(run_process(&cfg, &p).unwrap(), run_process(&cfg, &p).unwrap());
    }

    #[test]
    fn synchronous_update_is_order_independent() {
        let a = walker("a", Vec2::new(-5.0, 0.0), Vec2::new(5.0, 0.0));
        let b = walker("b", Vec2::new(5.0, 0.2), Vec2::new(-5.0, 0.2));
        let c = walker("c", Vec2::new(0.0, -5.0), Vec2::new(0.0, 5.0));
        let p = ParameterSet::default();
        let r1 = run_process(&config(vec![a.clone(), b.clone(), c.clone()], vec![car()]), &p).unwrap();
        let r2 = run_process(&config(vec![c, a, b], vec![car()]), &p).unwrap();
        assert_eq!(r1.pedestrians[0], r2.pedestrians[1]);
        assert_eq!(r1.pedestrians[1], r2.pedestrians[2]);
        assert_eq!(r1.pedestrians[2], r2.pedestrians[0]);
    }

    #[test]
    fn unreleased_pedestrian_waits() {
        let mut a = walker("a", Vec2::new(0.0, 0.0), Vec2::new(10.0, 0.0));
        a.release_time = 2.0;
        let r = run_process(&config(vec![a], vec![]), &ParameterSet::default()).unwrap();
        assert_eq!(r.pedestrians[0][4].position, Vec2::zeros());
        assert!(r.pedestrians[0][5].position.x > 0.0);
    }

    #[test]
    fn arrival_stops_pedestrian() {
        let r = run_process(
            &config(vec![walker("a", Vec2::zeros(), Vec2::new(4.0, 0.0))], vec![]),
            &ParameterSet::default(),
        )
        .unwrap();
        let k = r.arrivals[0].expect("arrives");
        let last = r.pedestrians[0].last().unwrap();
        assert_eq!(last.position, r.pedestrians[0][k].position);
        assert!((last.position - Vec2::new(4.0, 0.0)).norm() <= 0.3);
    }

    #[test]
    fn invalid_config_rejected() {
        let mut cfg = config(vec![], vec![]);
        cfg.dt = -1.0;
        assert!(run_process(&cfg, &ParameterSet::default()).is_err());
    }
}
