//! Temporary-destination (sub-goal) selection.
//!
//! A fan of `N_j + 1` candidate directions centred on the direction to the
//! final destination is ray cast against the occupancy of the surroundings:
//!
//! * other pedestrians: a capsule of radius `2 R_ped` swept from their
//!   current position along their velocity over `occupancy_horizon`;
//! * vehicles: the body extended forward to the front impact line, inflated
//!   by `R_ped`; a ray entering through the front face is a `Front` hit;
//! * obstacles: their edges.
//!
//! Only hits within `nav_range` obstruct. The chosen direction is the
//! passable one closest to the destination direction, else the closest one
//! not blocked by a vehicle front, else the fan edge nearer the current
//! heading. Ties between equally offset directions, and between equally
//! distant fan edges, go to the lower index
//! (the clockwise side).

use serde::{Deserialize, Serialize};

use crate::geometry::{angle_of, ray_aabb, ray_capsule, ray_segment, unit, wrap_angle, Aabb, BoxFace, Vec2};

use super::{ModelParams, PedestrianState, Surroundings};

const EDGE_TIE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Obstruction {
    None,
    Front,
    Other,
}

/// One evaluated candidate direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub direction: f64,
    /// Navigation range `d_j`.
    pub range: f64,
    pub obstruction: Obstruction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporaryDestination {
    /// Index `j*` of the chosen candidate; `None` when the ego already
    /// stands on its destination.
    pub candidate: Option<usize>,
    pub direction: f64,
    pub range: f64,
    pub point: Vec2,
}

/// Obstruction along one ray: nearest hit distance and its class.
fn cast(origin: Vec2, dir: Vec2, scene: &Scene, max_range: f64) -> Option<(f64, Obstruction)> {
    let mut best: Option<(f64, Obstruction)> = None;
    let mut keep = |t: f64, class: Obstruction| {
        if t <= max_range && best.is_none_or(|(b, _)| t < b) {
            best = Some((t, class));
        }
    };
    for c in &scene.capsules {
        if let Some(t) = ray_capsule(origin, dir, c.0, c.1, scene.capsule_radius) {
            keep(t, Obstruction::Other);
        }
    }
    for v in &scene.vehicles {
        let local_origin = crate::geometry::rotate(origin - v.position, -v.heading);
        let local_dir = crate::geometry::rotate(dir, -v.heading);
        if let Some((t, face)) = ray_aabb(local_origin, local_dir, &v.occupancy) {
            let class = if face == BoxFace::MaxX {
                Obstruction::Front
            } else {
                Obstruction::Other
            };
            keep(t, class);
        }
    }
    for (a, b) in &scene.segments {
        if let Some(t) = ray_segment(origin, dir, *a, *b) {
            keep(t, Obstruction::Other);
        }
    }
    best
}

struct VehicleOccupancy {
    position: Vec2,
    heading: f64,
    occupancy: Aabb,
}

/// Occupancy geometry of the surroundings, prepared once per ego.
struct Scene {
    capsules: Vec<(Vec2, Vec2)>,
    capsule_radius: f64,
    vehicles: Vec<VehicleOccupancy>,
    segments: Vec<(Vec2, Vec2)>,
}

impl Scene {
    fn build(ego: &PedestrianState, surroundings: &Surroundings<'_>, radius: f64, params: &ModelParams) -> Self {
        let capsule_radius = 2.0 * radius;
        let reach = params.nav_range + capsule_radius;
        let capsules = surroundings
            .pedestrians
            .iter()
            .map(|o| (o.position, o.position + o.velocity * params.occupancy_horizon))
            .filter(|(a, b)| crate::geometry::distance_to_segment(ego.position, *a, *b) <= reach)
            .collect();
        let vehicles = surroundings
            .vehicles
            .iter()
            .map(|v| {
                let occ = v.occupancy_local(params.prediction_horizon);
                VehicleOccupancy {
                    position: v.position,
                    heading: v.heading,
                    occupancy: Aabb::new(occ.min - Vec2::new(radius, radius), occ.max + Vec2::new(radius, radius)),
                }
            })
            .collect();
        let segments = surroundings.obstacles.iter().flat_map(|o| o.edges()).collect();
        Self {
            capsules,
            capsule_radius,
            vehicles,
            segments,
        }
    }
}

/// Evaluates every candidate direction of the fan around `phi_des`.
pub fn candidate_fan(
    ego: &PedestrianState,
    surroundings: &Surroundings<'_>,
    phi_des: f64,
    radius: f64,
    params: &ModelParams,
) -> Vec<Candidate> {
    let scene = Scene::build(ego, surroundings, radius, params);
    let n = params.direction_count as i64;
    (0..=n)
        .map(|j| {
            let direction = phi_des + (j - n / 2) as f64 * params.direction_spacing;
            match cast(ego.position, unit(direction), &scene, params.nav_range) {
                None => Candidate {
                    direction,
                    range: params.nav_range,
                    obstruction: Obstruction::None,
                },
                Some((t, class)) => Candidate {
                    direction,
                    range: (t - radius).max(0.0),
                    obstruction: class,
                },
            }
        })
        .collect()
}

/// Picks `j*` from an evaluated fan.
///
/// `ego_heading` is the ego velocity angle used by the last-resort rule.
pub fn select_candidate(fan: &[Candidate], ego_heading: f64) -> usize {
    let n = fan.len() - 1;
    let half = n / 2;
    let offset = |j: usize| j.abs_diff(half);
    let nearest = |ok: &dyn Fn(&Candidate) -> bool| {
        fan.iter()
            .enumerate()
            .filter(|(_, c)| ok(c))
            .min_by_key(|(j, _)| (offset(*j), *j))
            .map(|(j, _)| j)
    };
    if let Some(j) = nearest(&|c| c.obstruction == Obstruction::None) {
        return j;
    }
    if let Some(j) = nearest(&|c| c.obstruction != Obstruction::Front) {
        return j;
    }
    // a standing ego faces the fan centre, where both edges are equally far;
    // the tolerance keeps that tie from being settled by rounding
    let to_first = wrap_angle(ego_heading - fan[0].direction).abs();
    let to_last = wrap_angle(ego_heading - fan[n].direction).abs();
    if to_first <= to_last + EDGE_TIE_EPS {
        0
    } else {
        n
    }
}

/// Chooses the temporary destination for the ego this step.
pub fn temporary_destination(
    ego: &PedestrianState,
    surroundings: &Surroundings<'_>,
    destination: Vec2,
    radius: f64,
    params: &ModelParams,
) -> TemporaryDestination {
    let to_dest = destination - ego.position;
    if to_dest.norm() == 0.0 {
        return TemporaryDestination {
            candidate: None,
            direction: angle_of(ego.velocity),
            range: 0.0,
            point: destination,
        };
    }
    let phi_des = angle_of(to_dest);
    let fan = candidate_fan(ego, surroundings, phi_des, radius, params);
    let heading = if ego.speed() > 0.0 {
        angle_of(ego.velocity)
    } else {
        phi_des
    };
    let j = select_candidate(&fan, heading);
    let c = fan[j];
    TemporaryDestination {
        candidate: Some(j),
        direction: c.direction,
        range: c.range,
        point: ego.position + unit(c.direction) * c.range,
    }
}
