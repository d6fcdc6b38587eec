//! Repulsive and navigational force terms, the total-force limiter and the
//! integrator.

use crate::geometry::Vec2;

use super::{ModelParams, ObstacleShape, PedestrianProfile, PedestrianState, VehicleState};

/// Longitudinal weight of the vehicle repulsion as a function of the ego's
/// x position in the vehicle frame.
///
/// Full strength from the rear bumper up to the front impact line
/// `front_impact`, then a linear ramp to zero over `buffer`. Zero behind the
/// vehicle.
pub fn longitudinal_magnitude(local_x: f64, center_to_rear: f64, front_impact: f64, buffer: f64) -> f64 {
    if local_x >= -center_to_rear && local_x <= front_impact {
        1.0
    } else if local_x > front_impact && local_x < front_impact + buffer {
        1.0 - (local_x - front_impact) / buffer
    } else {
        0.0
    }
}

/// Lateral distance from the vehicle's side panel; zero inside the body width.
pub fn lateral_distance(local_y: f64, half_width: f64) -> f64 {
    (local_y.abs() - half_width).max(0.0)
}

/// Repulsion from a vehicle, always along the vehicle's local +y or -y axis.
pub fn vehicle_repulsive_force(ego: &PedestrianState, veh: &VehicleState, params: &ModelParams) -> Vec2 {
    let local = veh.to_local(ego.position);
    let m_lon = longitudinal_magnitude(
        local.x,
        veh.center_to_rear,
        veh.front_impact_distance(params.prediction_horizon),
        params.longitudinal_buffer,
    );
    if m_lon == 0.0 {
        return Vec2::zeros();
    }
    let m_lat = params.veh_strength * (-params.veh_decay * lateral_distance(local.y, veh.half_width)).exp();
    // on the centreline the push goes to +y
    let side = if local.y < 0.0 { -1.0 } else { 1.0 };
    veh.local_dir_to_world(Vec2::new(0.0, side)) * (m_lat * m_lon)
}

/// Angular weight of a neighbour at offset `to_other` (other minus ego):
/// 1 straight ahead of the ego's velocity, `alpha` straight behind.
///
/// A standing ego, or a neighbour at zero offset, is weighted fully.
pub fn anisotropy(velocity: Vec2, to_other: Vec2, alpha: f64) -> f64 {
    let denom = velocity.norm() * to_other.norm();
    let cos = if denom > 0.0 {
        (velocity.dot(&to_other) / denom).clamp(-1.0, 1.0)
    } else {
        1.0
    };
    alpha + (1.0 - alpha) * (1.0 + cos) / 2.0
}

/// Repulsion between the ego and another pedestrian, both of radius `radius`.
pub fn pedestrian_repulsive_force(
    ego: &PedestrianState,
    other: &PedestrianState,
    params: &ModelParams,
    radius: f64,
) -> Vec2 {
    let away = ego.position - other.position;
    let dist = away.norm();
    let weight = anisotropy(ego.velocity, -away, params.ped_anisotropy);
    let magnitude = params.ped_strength * (-params.ped_decay * (dist - 2.0 * radius)).exp();
    let dir = if dist > 0.0 { away / dist } else { Vec2::x() };
    dir * (magnitude * weight)
}

/// Repulsion from the closest point of a static obstacle.
pub fn obstacle_repulsive_force(ego: &PedestrianState, obs: &ObstacleShape, params: &ModelParams, radius: f64) -> Vec2 {
    let (closest, edge) = obs.closest_point(ego.position);
    let away = ego.position - closest;
    let dist = away.norm();
    let dir = if dist > 0.0 { away / dist } else { obs.edge_normal(edge) };
    dir * (params.obs_strength * (-params.obs_decay * (dist - radius)).exp())
}

/// Softened target velocity toward the temporary destination.
pub fn target_velocity(position: Vec2, temp_point: Vec2, desired_speed: f64, softening: f64) -> Vec2 {
    let to = temp_point - position;
    to * (desired_speed / (to.norm_squared() + softening * softening).sqrt())
}

/// Drives the ego velocity toward the target velocity.
pub fn navigational_force(ego: &PedestrianState, temp_point: Vec2, desired_speed: f64, params: &ModelParams) -> Vec2 {
    let v_tar = target_velocity(ego.position, temp_point, desired_speed, params.target_softening);
    (v_tar - ego.velocity) * params.nav_gain
}

/// Clamps the total force so the acceleration stays within `max_accel` and
/// the next velocity within `max_speed`.
pub fn limit_total_force(force: Vec2, velocity: Vec2, profile: &PedestrianProfile, dt: f64) -> Vec2 {
    let body = &profile.body;
    let mut accel = force / body.mass;
    let mut clamped = false;
    let a_norm = accel.norm();
    if a_norm > body.max_accel {
        accel *= body.max_accel / a_norm;
        clamped = true;
    }
    let v_next = velocity + accel * dt;
    let v_norm = v_next.norm();
    if v_norm > body.max_speed {
        accel = (v_next * (body.max_speed / v_norm) - velocity) / dt;
        clamped = true;
    }
    if clamped {
        accel * body.mass
    } else {
        force
    }
}

/// Semi-implicit Euler: velocity first, then position with the new velocity.
pub fn integrate_step(state: &PedestrianState, force: Vec2, mass: f64, dt: f64) -> PedestrianState {
    let velocity = state.velocity + force * (dt / mass);
    PedestrianState {
        position: state.position + velocity * dt,
        velocity,
    }
}
