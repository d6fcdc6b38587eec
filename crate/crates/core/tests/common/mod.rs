//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::Matrix2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use sgsfm::geometry::{angle_of, distance_to_segment, rotate, unit, wrap_angle};
use sgsfm::model::{ModelParams, Obstruction};
use sgsfm::{ObstacleShape, PedestrianState, Surroundings, Vec2, VehicleState};

/// Ground-truth values for the calibration checks.
pub fn theta_true() -> sgsfm::calibration::ThetaVector {
    sgsfm::calibration::ThetaVector {
        ped_decay: 1.2,
        veh_decay: 2.4,
        prediction_horizon: 3.5,
        longitudinal_buffer: 0.8,
        nav_gain: 450.0,
        direction_count: 100,
        nav_range: 5.0,
    }
}

/// A small random scene around an ego near the origin.
#[derive(Debug, Clone)]
pub struct Scene {
    pub ego: PedestrianState,
    pub destination: Vec2,
    pub pedestrians: Vec<PedestrianState>,
    pub vehicles: Vec<VehicleState>,
    pub obstacles: Vec<ObstacleShape>,
    pub params: ModelParams,
    pub radius: f64,
}

impl Scene {
    pub fn surroundings(&self) -> Surroundings<'_> {
        Surroundings::new(&self.pedestrians, &self.vehicles, &self.obstacles)
    }
}

fn random_vehicle(rng: &mut ChaCha8Rng) -> VehicleState {
    VehicleState {
        position: Vec2::new(rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0)),
        heading: rng.random_range(-PI..PI),
        speed: if rng.random_bool(0.2) {
            0.0
        } else {
            rng.random_range(0.5..4.0)
        },
        center_to_front: rng.random_range(1.5..2.8),
        center_to_rear: rng.random_range(1.5..2.8),
        half_width: rng.random_range(0.7..1.1),
    }
}

/// Up to five surrounding agents, sometimes an oncoming vehicle, and up to
/// one obstacle, with calibrated parameters drawn from the default bound box.
pub fn random_scene(rng: &mut ChaCha8Rng) -> Scene {
    let mut params = ModelParams::default();
    params.direction_count = 2 * rng.random_range(40..=60);
    params.nav_range = rng.random_range(3.0..7.0);
    params.prediction_horizon = rng.random_range(2.0..5.0);
    let ego = PedestrianState::new(
        Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        if rng.random_bool(0.15) {
            Vec2::zeros()
        } else {
            unit(rng.random_range(-PI..PI)) * rng.random_range(0.2..1.8)
        },
    );
    let destination = ego.position + unit(rng.random_range(-PI..PI)) * rng.random_range(1.0..15.0);
    let agents = rng.random_range(0..=5);
    let (mut pedestrians, mut vehicles) = (Vec::new(), Vec::new());
    for _ in 0..agents {
        if rng.random_bool(0.3) {
            vehicles.push(random_vehicle(rng));
        } else {
            let p = Vec2::new(rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0));
            let v = if rng.random_bool(0.2) {
                Vec2::zeros()
            } else {
                unit(rng.random_range(-PI..PI)) * rng.random_range(0.3..1.8)
            };
            pedestrians.push(PedestrianState::new(p, v));
        }
    }
    if rng.random_bool(0.25) {
        // oncoming vehicle whose front impact line lies just ahead of the ego
        let mut v = random_vehicle(rng);
        let toward = angle_of(destination - ego.position) + rng.random_range(-0.4..0.4);
        let gap = v.center_to_front + params.prediction_horizon * v.speed + rng.random_range(0.3..2.5);
        v.position = ego.position + unit(toward) * gap;
        v.heading = toward + PI + rng.random_range(-0.3..0.3);
        vehicles.push(v);
    }
    let mut obstacles = Vec::new();
    let enclosure = rng.random_range(0.0..1.0);
    if enclosure < 0.08 {
        // four parked vehicles whose fronts box the ego in on every side
        let turn = rng.random_range(-PI..PI);
        for k in 0..4 {
            let mut v = random_vehicle(rng);
            v.speed = 0.0;
            v.half_width = v.half_width.max(0.8);
            let out = turn + k as f64 * PI / 2.0;
            v.position = ego.position + unit(out) * (rng.random_range(0.6..0.9) + v.center_to_front + 0.25);
            v.heading = out + PI;
            vehicles.push(v);
        }
    } else if enclosure < 0.16 {
        // off-centre so no two walls are equally close
        let h = rng.random_range(1.5..2.5);
        let centre = ego.position + Vec2::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        let square = [(-h, -h), (h, -h), (h, h), (-h, h)].map(|(x, y)| centre + Vec2::new(x, y));
        obstacles.push(ObstacleShape::polygon(square.to_vec()).expect("valid square"));
    }
    if rng.random_bool(0.3) {
        let a = Vec2::new(rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0));
        let b = a + unit(rng.random_range(-PI..PI)) * rng.random_range(1.0..6.0);
        let c = b + unit(rng.random_range(-PI..PI)) * rng.random_range(1.0..4.0);
        let shape = if rng.random_bool(0.5) {
            ObstacleShape::polyline(vec![a, b])
        } else {
            ObstacleShape::polygon(vec![a, b, c])
        };
        if let Ok(s) = shape {
            obstacles.push(s);
        }
    }
    Scene {
        ego,
        destination,
        pedestrians,
        vehicles,
        obstacles,
        params,
        radius: 0.25,
    }
}

/// Result of the brute-force selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleChoice {
    pub index: usize,
    pub range: f64,
    pub point: Vec2,
}

fn distance_to_box(p: Vec2, lo: Vec2, hi: Vec2) -> f64 {
    let dx = (lo.x - p.x).max(0.0).max(p.x - hi.x);
    let dy = (lo.y - p.y).max(0.0).max(p.y - hi.y);
    (dx * dx + dy * dy).sqrt()
}

/// Smallest `t` in `[0, horizon]` where the ray touches the convex set
/// `{dist(x) <= 0}`; `None` when the origin already lies in it.
fn convex_entry(dist: impl Fn(f64) -> f64, horizon: f64) -> Option<f64> {
    if dist(0.0) <= 0.0 {
        return None;
    }
    // golden-section search for the minimum of the convex distance profile
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, horizon);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    for _ in 0..200 {
        if dist(c) <= 0.0 {
            b = c;
            break;
        }
        if dist(c) < dist(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    let inside = [c, d, a, b].into_iter().find(|t| dist(*t) <= 0.0)?;
    let (mut lo, mut hi) = (0.0, inside);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dist(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

fn segment_hit(o: Vec2, dir: Vec2, a: Vec2, b: Vec2) -> Option<f64> {
    // solve o + t dir = a + s (b - a)
    let m = Matrix2::new(dir.x, a.x - b.x, dir.y, a.y - b.y);
    let sol = m.lu().solve(&(a - o))?;
    let (t, s) = (sol[0], sol[1]);
    (t > 0.0 && (0.0..=1.0).contains(&s) && t.is_finite()).then_some(t)
}

/// First obstruction along one direction, found without the library's ray
/// casting: root bracketing on distance profiles and a linear solve for
/// segments.
pub fn oracle_cast(scene: &Scene, phi: f64) -> Option<(f64, Obstruction)> {
    let o = scene.ego.position;
    let dir = unit(phi);
    let p = &scene.params;
    let horizon = p.nav_range + 1.0;
    let r = scene.radius;
    let mut hits: Vec<(f64, Obstruction)> = Vec::new();
    for other in &scene.pedestrians {
        let a = other.position;
        let b = a + other.velocity * p.occupancy_horizon;
        if let Some(t) = convex_entry(|t| distance_to_segment(o + dir * t, a, b) - 2.0 * r, horizon) {
            hits.push((t, Obstruction::Other));
        }
    }
    for v in &scene.vehicles {
        let lo = Vec2::new(-v.center_to_rear - r, -v.half_width - r);
        let hi = Vec2::new(v.center_to_front + p.prediction_horizon * v.speed + r, v.half_width + r);
        let local = |t: f64| rotate(o + dir * t - v.position, -v.heading);
        if let Some(t) = convex_entry(|t| distance_to_box(local(t), lo, hi), horizon) {
            let q = local(t);
            let gaps = [q.x - lo.x, hi.x - q.x, q.y - lo.y, hi.y - q.y];
            let face = (0..4).min_by(|i, j| gaps[*i].abs().total_cmp(&gaps[*j].abs())).unwrap();
            hits.push((
                t,
                if face == 1 {
                    Obstruction::Front
                } else {
                    Obstruction::Other
                },
            ));
        }
    }
    for obs in &scene.obstacles {
        let vs = obs.vertices();
        let mut edges: Vec<(Vec2, Vec2)> = vs.windows(2).map(|w| (w[0], w[1])).collect();
        if obs.is_closed() {
            edges.push((vs[vs.len() - 1], vs[0]));
        }
        for (a, b) in edges {
            if let Some(t) = segment_hit(o, dir, a, b) {
                hits.push((t, Obstruction::Other));
            }
        }
    }
    hits.into_iter()
        .filter(|(t, _)| *t <= p.nav_range)
        .min_by(|x, y| x.0.total_cmp(&y.0))
}

/// Enumerates every candidate and applies the three selection rules in
/// order. Returns the chosen candidate together with all per-direction
/// classes.
pub fn oracle_choice(scene: &Scene) -> Option<(OracleChoice, Vec<Obstruction>)> {
    let to_dest = scene.destination - scene.ego.position;
    if to_dest.norm() == 0.0 {
        return None;
    }
    let p = &scene.params;
    let n = p.direction_count as usize;
    let phi_des = angle_of(to_dest);
    let mut dirs = Vec::new();
    let mut classes = Vec::new();
    let mut ranges = Vec::new();
    for j in 0..=n {
        let phi = phi_des + (j as f64 - (n / 2) as f64) * p.direction_spacing;
        let (range, class) = match oracle_cast(scene, phi) {
            None => (p.nav_range, Obstruction::None),
            Some((t, c)) => ((t - scene.radius).max(0.0), c),
        };
        dirs.push(phi);
        classes.push(class);
        ranges.push(range);
    }
    let centre = n / 2;
    let closest = |allowed: &dyn Fn(Obstruction) -> bool| -> Option<usize> {
        let mut best: Option<usize> = None;
        for j in 0..=n {
            if !allowed(classes[j]) {
                continue;
            }
            let better = match best {
                None => true,
                Some(b) => j.abs_diff(centre) < b.abs_diff(centre),
            };
            if better {
                best = Some(j);
            }
        }
        best
    };
    let index = closest(&|c| c == Obstruction::None)
        .or_else(|| closest(&|c| c != Obstruction::Front))
        .unwrap_or_else(|| {
            let heading = if scene.ego.velocity.norm() > 0.0 {
                angle_of(scene.ego.velocity)
            } else {
                phi_des
            };
            if wrap_angle(heading - dirs[0]).abs() <= wrap_angle(heading - dirs[n]).abs() + 1e-9 {
                0
            } else {
                n
            }
        });
    Some((
        OracleChoice {
            index,
            range: ranges[index],
            point: scene.ego.position + unit(dirs[index]) * ranges[index],
        },
        classes,
    ))
}
