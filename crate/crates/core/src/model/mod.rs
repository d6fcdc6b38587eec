//! Force computation and single-step update of one pedestrian.

mod forces;
mod navigation;
mod params;
mod types;

pub use forces::{
    anisotropy, integrate_step, lateral_distance, limit_total_force, longitudinal_magnitude, navigational_force,
    obstacle_repulsive_force, pedestrian_repulsive_force, target_velocity, vehicle_repulsive_force,
};
pub use navigation::{
    candidate_fan, select_candidate, temporary_destination, Candidate, Obstruction, TemporaryDestination,
};
pub use params::{ModelParams, ParameterSet};
pub use types::{ObstacleShape, PedestrianBody, PedestrianProfile, PedestrianState, Surroundings, VehicleState};

use crate::geometry::Vec2;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ModelError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("invalid pedestrian profile: {0}")]
    InvalidProfile(String),
    #[error("invalid vehicle state: {0}")]
    InvalidVehicle(String),
    #[error("invalid obstacle: {0}")]
    InvalidObstacle(String),
    #[error("parameter file: {0}")]
    ParamFile(String),
}

/// Sum of all repulsive terms acting on the ego.
pub fn repulsive_force(
    ego: &PedestrianState,
    surroundings: &Surroundings<'_>,
    params: &ModelParams,
    radius: f64,
) -> Vec2 {
    let veh: Vec2 = surroundings
        .vehicles
        .iter()
        .map(|v| vehicle_repulsive_force(ego, v, params))
        .sum();
    let ped: Vec2 = surroundings
        .pedestrians
        .iter()
        .map(|o| pedestrian_repulsive_force(ego, o, params, radius))
        .sum();
    let obs: Vec2 = surroundings
        .obstacles
        .iter()
        .map(|o| obstacle_repulsive_force(ego, o, params, radius))
        .sum();
    veh + ped + obs
}

/// Advances one pedestrian by `dt`: repulsion plus navigation toward the
/// temporary destination, limited, then integrated.
pub fn pedestrian_model_step(
    state: &PedestrianState,
    profile: &PedestrianProfile,
    surroundings: &Surroundings<'_>,
    params: &ModelParams,
    dt: f64,
) -> PedestrianState {
    let radius = profile.body.radius;
    let f_rep = repulsive_force(state, surroundings, params, radius);
    let temp = temporary_destination(state, surroundings, profile.destination, radius, params);
    let f_nav = navigational_force(state, temp.point, profile.desired_speed, params);
    let total = limit_total_force(f_rep + f_nav, state.velocity, profile, dt);
    integrate_step(state, total, profile.body.mass, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn resting_on_destination_stays_put() {
        let params = ModelParams::default();
        let profile = PedestrianProfile::new(PedestrianBody::default(), 1.3, Vec2::new(4.0, 4.0));
        let s = PedestrianState::at_rest(Vec2::new(4.0, 4.0));
        let next = pedestrian_model_step(&s, &profile, &Surroundings::default(), &params, 0.5);
        assert_abs_diff_eq!(next.position, s.position, epsilon = 1e-12);
        assert_abs_diff_eq!(next.velocity, Vec2::zeros(), epsilon = 1e-12);
    }

    #[test]
    fn step_is_pure() {
        let params = ModelParams::default();
        let profile = PedestrianProfile::new(PedestrianBody::default(), 1.3, Vec2::new(10.0, 0.0));
        let others = [PedestrianState::new(Vec2::new(2.0, 0.3), Vec2::new(-1.0, 0.0))];
        let s = Surroundings {
            pedestrians: &others,
            ..Default::default()
        };
        let ego = PedestrianState::new(Vec2::zeros(), Vec2::new(1.2, 0.0));
        let a = pedestrian_model_step(&ego, &profile, &s, &params, 0.5);
        let b = pedestrian_model_step(&ego, &profile, &s, &params, 0.5);
        assert_eq!(a, b);
    }
}
