use serde::{Deserialize, Serialize};

use crate::geometry::{angle_of, closest_point_on_segment, unit, wrap_angle, Vec2};
use crate::model::VehicleState;

use super::SimulationError;

/// Pure-pursuit path follower on a kinematic bicycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurePursuit {
    /// Reference polyline, at least two points.
    pub path: Vec<Vec2>,
    /// m/s
    pub cruise_speed: f64,
    /// m
    #[serde(default = "default_lookahead")]
    pub lookahead: f64,
    /// m
    #[serde(default = "default_wheelbase")]
    pub wheelbase: f64,
}

fn default_lookahead() -> f64 {
    4.0
}

fn default_wheelbase() -> f64 {
    2.7
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimedPose {
    pub time: f64,
    pub position: Vec2,
    pub heading: f64,
}

/// How a vehicle moves through a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum VehiclePolicy {
    PurePursuit(PurePursuit),
    Replay { poses: Vec<TimedPose> },
    Static,
}

impl PurePursuit {
    pub fn new(path: Vec<Vec2>, cruise_speed: f64) -> Self {
        Self {
            path,
            cruise_speed,
            lookahead: default_lookahead(),
            wheelbase: default_wheelbase(),
        }
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        if self.path.len() < 2 {
            return Err(SimulationError::InvalidPolicy(
                "pure-pursuit path needs at least 2 points".into(),
            ));
        }
        if self.path.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(SimulationError::InvalidPolicy("non-finite path point".into()));
        }
        if self.path.windows(2).any(|w| w[0] == w[1]) {
            return Err(SimulationError::InvalidPolicy("repeated consecutive path point".into()));
        }
        if !(self.cruise_speed >= 0.0 && self.cruise_speed.is_finite()) {
            return Err(SimulationError::InvalidPolicy("cruise speed must be >= 0".into()));
        }
        if !(self.lookahead > 0.0 && self.lookahead.is_finite())
            || !(self.wheelbase > 0.0 && self.wheelbase.is_finite())
        {
            return Err(SimulationError::InvalidPolicy(
                "lookahead and wheelbase must be > 0".into(),
            ));
        }
        Ok(())
    }

    fn total_length(&self) -> f64 {
        self.path.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    /// Arc length of the point on the path closest to `p`.
    fn project(&self, p: Vec2) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        let mut s0 = 0.0;
        for w in self.path.windows(2) {
            let q = closest_point_on_segment(p, w[0], w[1]);
            let d = (q - p).norm_squared();
            if d < best.0 {
                best = (d, s0 + (q - w[0]).norm());
            }
            s0 += (w[1] - w[0]).norm();
        }
        best.1
    }

    /// Point at arc length `s`, extending the last segment past the end.
    fn point_at(&self, s: f64) -> Vec2 {
        let mut rem = s;
        for w in self.path.windows(2) {
            let seg = (w[1] - w[0]).norm();
            if rem <= seg {
                return w[0] + (w[1] - w[0]) * (rem / seg);
            }
            rem -= seg;
        }
        let n = self.path.len();
        let last = self.path[n - 1];
        last + (last - self.path[n - 2]).normalize() * rem
    }

    /// Steering angle commanded for the current pose; zero once the path is
    /// exhausted.
    pub fn steering(&self, veh: &VehicleState) -> f64 {
        let rear = veh.position - unit(veh.heading) * (self.wheelbase / 2.0);
        let s = self.project(rear);
        let n = self.path.len();
        let last = self.path[n - 1];
        let past_end = s >= self.total_length() - 1e-9 && (rear - last).dot(&(last - self.path[n - 2])) >= 0.0;
        if past_end {
            return 0.0;
        }
        let target = self.point_at(s + self.lookahead);
        let to_target = target - rear;
        let dist = to_target.norm();
        if dist == 0.0 {
            return 0.0;
        }
        let alpha = wrap_angle(angle_of(to_target) - veh.heading);
        (2.0 * self.wheelbase * alpha.sin()).atan2(dist)
    }
}

/// One pure-pursuit update: steer toward the lookahead point and advance the
/// kinematic bicycle (rear-axle reference) at cruise speed.
pub fn pure_pursuit_step(veh: &VehicleState, policy: &PurePursuit, dt: f64) -> VehicleState {
    let delta = policy.steering(veh);
    let v = policy.cruise_speed;
    let half_wb = policy.wheelbase / 2.0;
    let rear = veh.position - unit(veh.heading) * half_wb;
    let rear_next = rear + unit(veh.heading) * (v * dt);
    let heading = wrap_angle(veh.heading + v / policy.wheelbase * delta.tan() * dt);
    VehicleState {
        position: rear_next + unit(heading) * half_wb,
        heading,
        speed: v,
        ..*veh
    }
}

/// Pose and speed at time `t` from a time-ordered pose sequence, clamped to
/// the first/last pose outside its span.
pub fn replay_state(poses: &[TimedPose], template: &VehicleState, t: f64) -> VehicleState {
    let idx = poses.partition_point(|p| p.time <= t);
    let (position, heading, speed) = match idx {
        0 => (poses[0].position, poses[0].heading, 0.0),
        i if i == poses.len() => {
            let p = poses[i - 1];
            (p.position, p.heading, 0.0)
        }
        i => {
            let (a, b) = (poses[i - 1], poses[i]);
            let span = b.time - a.time;
            let w = (t - a.time) / span;
            let pos = a.position + (b.position - a.position) * w;
            let heading = a.heading + wrap_angle(b.heading - a.heading) * w;
            (pos, wrap_angle(heading), (b.position - a.position).norm() / span)
        }
    };
    VehicleState {
        position,
        heading,
        speed,
        ..*template
    }
}

impl VehiclePolicy {
    pub fn validate(&self) -> Result<(), SimulationError> {
        match self {
            VehiclePolicy::PurePursuit(pp) => pp.validate(),
            VehiclePolicy::Replay { poses } => {
                if poses.is_empty() {
                    return Err(SimulationError::InvalidPolicy("empty replay sequence".into()));
                }
                if poses
                    .iter()
                    .any(|p| !p.time.is_finite() || !p.heading.is_finite() || !p.position.iter().all(|c| c.is_finite()))
                {
                    return Err(SimulationError::InvalidPolicy("non-finite replay pose".into()));
                }
                if poses.windows(2).any(|w| w[1].time <= w[0].time) {
                    return Err(SimulationError::InvalidPolicy(
                        "replay sequence not strictly time-increasing".into(),
                    ));
                }
                Ok(())
            }
            VehiclePolicy::Static => Ok(()),
        }
    }

    /// State at the start of the scenario.
    pub fn initial_state(&self, configured: &VehicleState) -> VehicleState {
        match self {
            VehiclePolicy::Replay { poses } => replay_state(poses, configured, 0.0),
            VehiclePolicy::Static => VehicleState {
                speed: 0.0,
                ..*configured
            },
            VehiclePolicy::PurePursuit(pp) => VehicleState {
                speed: pp.cruise_speed,
                ..*configured
            },
        }
    }

    /// State at time `t_next = t + dt` given the state at `t`.
    pub fn advance(&self, veh: &VehicleState, t_next: f64, dt: f64) -> VehicleState {
        match self {
            VehiclePolicy::PurePursuit(pp) => pure_pursuit_step(veh, pp, dt),
            VehiclePolicy::Replay { poses } => replay_state(poses, veh, t_next),
            VehiclePolicy::Static => *veh,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn car_at(position: Vec2, heading: f64) -> VehicleState {
        VehicleState {
            position,
            heading,
            speed: 2.0,
            center_to_front: 2.25,
            center_to_rear: 2.25,
            half_width: 0.9,
        }
    }

    fn straight() -> PurePursuit {
        PurePursuit::new(vec![Vec2::new(-50.0, 0.0), Vec2::new(50.0, 0.0)], 2.0)
    }

    #[test]
    fn aligned_on_straight_path_goes_straight() {
        let pp = straight();
        let v = car_at(Vec2::new(0.0, 0.0), 0.0);
        assert_eq!(pp.steering(&v), 0.0);
        let next = pure_pursuit_step(&v, &pp, 0.5);
        assert_abs_diff_eq!(next.position, Vec2::new(1.0, 0.0), epsilon = 1e-12);
        assert_eq!(next.heading, 0.0);
        assert_eq!(next.speed, 2.0);
    }

    #[test]
    fn offset_left_steers_right() {
        let pp = straight();
        let v = car_at(Vec2::new(0.0, 0.5), 0.0);
        let delta = pp.steering(&v);
        // independent evaluation: rear axle at (-1.35, 0.5), target at (2.65, 0)
        let alpha = (-0.5f64).atan2(4.0);
        let dist = (16.0f64 + 0.25).sqrt();
        let expected = (2.0 * 2.7 * alpha.sin()).atan2(dist);
        assert!(delta < 0.0);
        assert_abs_diff_eq!(delta, expected, epsilon = 1e-12);
    }

    #[test]
    fn converges_to_straight_path() {
        let pp = straight();
        let mut v = car_at(Vec2::new(-40.0, 1.5), 0.2);
        for _ in 0..60 {
            v = pure_pursuit_step(&v, &pp, 0.5);
            assert_eq!(v.speed, 2.0);
        }
        assert!(v.position.y.abs() <= 0.05, "lateral error {}", v.position.y);
    }

    #[test]
    fn path_exhausted_holds_heading() {
        let pp = PurePursuit::new(vec![Vec2::new(0.0, 0.0), Vec2::new(5.0, 0.0)], 2.0);
        let v = car_at(Vec2::new(9.0, 0.3), 0.1);
        assert_eq!(pp.steering(&v), 0.0);
        let next = pure_pursuit_step(&v, &pp, 0.5);
        assert_eq!(next.heading, 0.1);
        assert_abs_diff_eq!((next.position - v.position).norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn replay_interpolates() {
        let poses = vec![
            TimedPose {
                time: 0.0,
                position: Vec2::zeros(),
                heading: 0.0,
            },
            TimedPose {
                time: 2.0,
                position: Vec2::new(4.0, 0.0),
                heading: 0.2,
            },
        ];
        let s = replay_state(&poses, &car_at(Vec2::zeros(), 0.0), 0.5);
        assert_abs_diff_eq!(s.position, Vec2::new(1.0, 0.0), epsilon = 1e-12);
        assert_abs_diff_eq!(s.heading, 0.05, epsilon = 1e-12);
        assert_abs_diff_eq!(s.speed, 2.0, epsilon = 1e-12);
        let after = replay_state(&poses, &car_at(Vec2::zeros(), 0.0), 5.0);
        assert_eq!(after.position, Vec2::new(4.0, 0.0));
    }

    #[test]
    fn replay_must_be_monotone() {
        let p = TimedPose {
            time: 1.0,
            position: Vec2::zeros(),
            heading: 0.0,
        };
        assert!(VehiclePolicy::Replay { poses: vec![p, p] }.validate().is_err());
    }
}
