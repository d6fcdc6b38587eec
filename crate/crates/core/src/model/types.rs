use serde::{Deserialize, Serialize};

use crate::geometry::{closest_point_on_segment, rotate, Aabb, Vec2};

use super::ModelError;

/// Position and velocity of one pedestrian at one time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PedestrianState {
    pub position: Vec2,
    pub velocity: Vec2,
}

impl PedestrianState {
    pub fn new(position: Vec2, velocity: Vec2) -> Self {
        Self { position, velocity }
    }

    pub fn at_rest(position: Vec2) -> Self {
        Self::new(position, Vec2::zeros())
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().chain(self.velocity.iter()).all(|c| c.is_finite())
    }
}

/// Physical limits and body size shared by pedestrians unless overridden.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PedestrianBody {
    /// kg. Together with `nav_gain` this sets the velocity relaxation time
    /// `mass / nav_gain`; the explicit step is only stable while
    /// `nav_gain * dt / mass < 2`.
    pub mass: f64,
    /// m
    pub radius: f64,
    /// m/s^2
    pub max_accel: f64,
    /// m/s
    pub max_speed: f64,
}

impl Default for PedestrianBody {
    fn default() -> Self {
        Self {
            mass: 400.0,
            radius: 0.25,
            max_accel: 5.0,
            max_speed: 3.0,
        }
    }
}

/// Goal and limits of one pedestrian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PedestrianProfile {
    pub desired_speed: f64,
    pub destination: Vec2,
    pub body: PedestrianBody,
}

impl PedestrianProfile {
    pub fn new(body: PedestrianBody, desired_speed: f64, destination: Vec2) -> Self {
        Self {
            desired_speed,
            destination,
            body,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let b = &self.body;
        let ok = self.desired_speed > 0.0
            && self.desired_speed <= b.max_speed
            && b.mass > 0.0
            && b.radius > 0.0
            && b.max_accel > 0.0
            && self.destination.iter().all(|c| c.is_finite());
        if ok {
            Ok(())
        } else {
            Err(ModelError::InvalidProfile(format!("{self:?}")))
        }
    }
}

/// Pose, speed and body dimensions of a vehicle.
///
/// The local frame has its origin at the vehicle centre with +x along the
/// heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub position: Vec2,
    pub heading: f64,
    /// Longitudinal speed, m/s.
    pub speed: f64,
    pub center_to_front: f64,
    pub center_to_rear: f64,
    pub half_width: f64,
}

impl VehicleState {
    pub fn validate(&self) -> Result<(), ModelError> {
        let ok = self.center_to_front > 0.0
            && self.center_to_rear > 0.0
            && self.half_width > 0.0
            && self.speed >= 0.0
            && self.position.iter().all(|c| c.is_finite())
            && self.heading.is_finite();
        if ok {
            Ok(())
        } else {
            Err(ModelError::InvalidVehicle(format!("{self:?}")))
        }
    }

    pub fn to_local(&self, p: Vec2) -> Vec2 {
        rotate(p - self.position, -self.heading)
    }

    pub fn to_world(&self, local: Vec2) -> Vec2 {
        self.position + rotate(local, self.heading)
    }

    pub fn local_dir_to_world(&self, local: Vec2) -> Vec2 {
        rotate(local, self.heading)
    }

    /// Distance from the centre to the front impact line, `L_f + tau * v`.
    pub fn front_impact_distance(&self, prediction_horizon: f64) -> f64 {
        self.center_to_front + prediction_horizon * self.speed
    }

    /// Physical body in the local frame.
    pub fn body_local(&self) -> Aabb {
        Aabb::new(
            Vec2::new(-self.center_to_rear, -self.half_width),
            Vec2::new(self.center_to_front, self.half_width),
        )
    }

    /// Body extended forward to the front impact line, in the local frame.
    pub fn occupancy_local(&self, prediction_horizon: f64) -> Aabb {
        Aabb::new(
            Vec2::new(-self.center_to_rear, -self.half_width),
            Vec2::new(self.front_impact_distance(prediction_horizon), self.half_width),
        )
    }

    /// Whether `p` lies strictly inside the physical body.
    pub fn body_contains(&self, p: Vec2) -> bool {
        self.body_local().contains_strict(self.to_local(p))
    }

    /// Corners of the physical body in world coordinates, counter-clockwise.
    pub fn body_corners(&self) -> [Vec2; 4] {
        let b = self.body_local();
        [
            self.to_world(b.min),
            self.to_world(Vec2::new(b.max.x, b.min.y)),
            self.to_world(b.max),
            self.to_world(Vec2::new(b.min.x, b.max.y)),
        ]
    }
}

/// Static obstacle described by a polyline or a closed polygon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ObstacleRepr", into = "ObstacleRepr")]
pub struct ObstacleShape {
    vertices: Vec<Vec2>,
    closed: bool,
}

#[derive(Serialize, Deserialize)]
struct ObstacleRepr {
    vertices: Vec<Vec2>,
    #[serde(default)]
    closed: bool,
}

impl TryFrom<ObstacleRepr> for ObstacleShape {
    type Error = ModelError;

    fn try_from(r: ObstacleRepr) -> Result<Self, Self::Error> {
        if r.closed {
            ObstacleShape::polygon(r.vertices)
        } else {
            ObstacleShape::polyline(r.vertices)
        }
    }
}

impl From<ObstacleShape> for ObstacleRepr {
    fn from(s: ObstacleShape) -> Self {
        Self {
            vertices: s.vertices,
            closed: s.closed,
        }
    }
}

impl ObstacleShape {
    pub fn polyline(vertices: Vec<Vec2>) -> Result<Self, ModelError> {
        Self::new(vertices, false)
    }

    pub fn polygon(vertices: Vec<Vec2>) -> Result<Self, ModelError> {
        Self::new(vertices, true)
    }

    fn new(vertices: Vec<Vec2>, closed: bool) -> Result<Self, ModelError> {
        if vertices.len() < 2 {
            return Err(ModelError::InvalidObstacle("fewer than 2 vertices".into()));
        }
        if vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(ModelError::InvalidObstacle("non-finite vertex".into()));
        }
        if vertices.windows(2).any(|w| w[0] == w[1]) || (closed && vertices[0] == vertices[vertices.len() - 1]) {
            return Err(ModelError::InvalidObstacle("repeated consecutive vertex".into()));
        }
        Ok(Self { vertices, closed })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Edges in traversal order, including the closing edge of a polygon.
    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.vertices.len();
        let count = if self.closed { n } else { n - 1 };
        (0..count).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Closest point on the boundary and the index of the edge it lies on.
    /// Ties go to the lowest edge index.
    pub fn closest_point(&self, p: Vec2) -> (Vec2, usize) {
        let mut best = (self.vertices[0], 0, f64::INFINITY);
        for (i, (a, b)) in self.edges().enumerate() {
            let q = closest_point_on_segment(p, a, b);
            let d = (q - p).norm_squared();
            if d < best.2 {
                best = (q, i, d);
            }
        }
        (best.0, best.1)
    }

    /// Unit normal of edge `i`. Points outward for a polygon; for a
    /// polyline it is the left-hand normal of the edge direction.
    pub fn edge_normal(&self, i: usize) -> Vec2 {
        let (a, b) = self.edges().nth(i).expect("edge index in range");
        let e = (b - a).normalize();
        let left = Vec2::new(-e.y, e.x);
        if self.closed && self.signed_area() > 0.0 {
            -left
        } else {
            left
        }
    }

    fn signed_area(&self) -> f64 {
        self.edges().map(|(a, b)| a.x * b.y - b.x * a.y).sum::<f64>() * 0.5
    }

    pub fn transformed(&self, f: impl Fn(Vec2) -> Vec2) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| f(*v)).collect(),
            closed: self.closed,
        }
    }
}

/// Borrowed view of everything around the ego pedestrian.
#[derive(Debug, Clone, Copy, Default)]
pub struct Surroundings<'a> {
    pub pedestrians: &'a [PedestrianState],
    pub vehicles: &'a [VehicleState],
    pub obstacles: &'a [ObstacleShape],
}

impl<'a> Surroundings<'a> {
    pub fn new(
        pedestrians: &'a [PedestrianState],
        vehicles: &'a [VehicleState],
        obstacles: &'a [ObstacleShape],
    ) -> Self {
        Self {
            pedestrians,
            vehicles,
            obstacles,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.pedestrians.is_empty() && self.vehicles.is_empty() && self.obstacles.is_empty()
    }
}
