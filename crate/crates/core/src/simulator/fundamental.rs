//! The twelve fundamental interaction scenarios, four categories of three.
//!
//! Layout conventions, shared by every scenario:
//!
//! * vehicles drive along the world x axis (the road centreline `y = 0`)
//!   toward +x, 4.5 m x 1.8 m bodies, following a straight reference path
//!   with pure pursuit;
//! * a pedestrian flow is `n` walkers standing on a line perpendicular to
//!   the flow direction, 0.8 m apart, released 0.5 s after one another, each
//!   walking straight to a destination `length` metres ahead of its start;
//! * desired speeds are drawn uniformly from [1.2, 1.4] m/s using the
//!   scenario seed.
//!
//! Identifiers run `fund-01` to `fund-12`, row-major over the category
//! grid.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{unit, Vec2};
use crate::model::{PedestrianState, VehicleState};

use super::{PedestrianSpec, PurePursuit, ScenarioConfig, VehiclePolicy, VehicleSpec};

pub const FUNDAMENTAL_COUNT: usize = 12;

const FLOW_SPACING: f64 = 0.8;
const RELEASE_STAGGER: f64 = 0.5;
const T_END: f64 = 60.0;
const DT: f64 = 0.5;
const HALF_LENGTH: f64 = 2.25;
const HALF_WIDTH: f64 = 0.9;
const ROAD_END: f64 = 150.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Category {
    PedestrianOnly,
    VehicleFrontBack,
    Vehicle45Degree,
    VehicleLateral,
}

impl Category {
    pub fn label(&self) -> &'static str {
        match self {
            Category::PedestrianOnly => "pedestrian-only",
            Category::VehicleFrontBack => "vehicle front/back",
            Category::Vehicle45Degree => "vehicle 45-degree",
            Category::VehicleLateral => "vehicle lateral",
        }
    }

    pub fn of_index(index: usize) -> Category {
        match index / 3 {
            0 => Category::PedestrianOnly,
            1 => Category::VehicleFrontBack,
            2 => Category::Vehicle45Degree,
            _ => Category::VehicleLateral,
        }
    }
}

struct Flow {
    /// Centre of the start line.
    start: Vec2,
    heading: f64,
    length: f64,
}

impl Flow {
    fn new(start: (f64, f64), heading: f64, length: f64) -> Self {
        Self {
            start: Vec2::new(start.0, start.1),
            heading,
            length,
        }
    }

    /// A flow whose start line is centred `back` metres behind the origin.
    fn through_origin(heading: f64, back: f64, length: f64) -> Self {
        let s = -unit(heading) * back;
        Self::new((s.x, s.y), heading, length)
    }
}

struct Layout {
    description: &'static str,
    flows: Vec<Flow>,
    /// Initial x of each vehicle centre on the road.
    vehicles: Vec<f64>,
}

fn layout(index: usize) -> Layout {
    let east = 0.0;
    let west = PI;
    let north = FRAC_PI_2;
    let south = -FRAC_PI_2;
    match index {
        0 => Layout {
            description: "two opposing pedestrian flows meet head-on",
            flows: vec![
                Flow::through_origin(east, 10.0, 20.0),
                Flow::through_origin(west, 10.0, 20.0),
            ],
            vehicles: vec![],
        },
        1 => Layout {
            description: "two pedestrian flows cross at a right angle",
            flows: vec![
                Flow::through_origin(east, 10.0, 20.0),
                Flow::through_origin(north, 10.0, 20.0),
            ],
            vehicles: vec![],
        },
        2 => Layout {
            description: "four pedestrian flows cross from all directions",
            flows: vec![
                Flow::through_origin(east, 10.0, 20.0),
                Flow::through_origin(west, 10.0, 20.0),
                Flow::through_origin(north, 10.0, 20.0),
                Flow::through_origin(south, 10.0, 20.0),
            ],
            vehicles: vec![],
        },
        3 => Layout {
            description: "pedestrians walk along the road toward the oncoming vehicle (front interaction)",
            flows: vec![Flow::new((14.0, 0.0), west, 28.0)],
            vehicles: vec![-30.0],
        },
        4 => Layout {
            description: "pedestrians walk along the road and are overtaken from behind (back interaction)",
            flows: vec![Flow::new((-10.0, 0.0), east, 50.0)],
            vehicles: vec![-30.0],
        },
        5 => Layout {
            description: "front and back interaction at once",
            flows: vec![Flow::new((14.0, 0.0), west, 28.0), Flow::new((-10.0, 0.0), east, 50.0)],
            vehicles: vec![-30.0],
        },
        6 => Layout {
            description: "a flow crosses the road at 45 degrees, walking with the traffic direction",
            flows: vec![Flow::through_origin(FRAC_PI_4, 12.0, 24.0)],
            vehicles: vec![-26.0],
        },
        7 => Layout {
            description: "a flow crosses the road at 45 degrees, walking against the traffic direction",
            flows: vec![Flow::through_origin(3.0 * FRAC_PI_4, 12.0, 24.0)],
            vehicles: vec![-26.0],
        },
        8 => Layout {
            description: "two flows cross the road at 45 and 135 degrees",
            flows: vec![
                Flow::through_origin(FRAC_PI_4, 12.0, 24.0),
                Flow::through_origin(3.0 * FRAC_PI_4, 12.0, 24.0),
            ],
            vehicles: vec![-26.0],
        },
        9 => Layout {
            description: "a flow crosses the road perpendicularly in front of the vehicle",
            flows: vec![Flow::through_origin(north, 10.0, 20.0)],
            vehicles: vec![-24.0],
        },
        10 => Layout {
            description: "two opposing flows cross the road perpendicularly",
            flows: vec![
                Flow::through_origin(north, 10.0, 20.0),
                Flow::through_origin(south, 10.0, 20.0),
            ],
            vehicles: vec![-24.0],
        },
        11 => Layout {
            description: "two opposing perpendicular flows and two vehicles with a gap between them",
            flows: vec![
                Flow::through_origin(north, 10.0, 20.0),
                Flow::through_origin(south, 10.0, 20.0),
            ],
            vehicles: vec![-20.0, -36.0],
        },
        _ => unreachable!("fundamental scenario index out of range"),
    }
}

/// Builds fundamental scenario `index` (0-based, row-major).
pub fn fundamental_scenario(index: usize, n_ped_per_flow: usize, cruise_speed: f64, seed: u64) -> ScenarioConfig {
    assert!(
        index < FUNDAMENTAL_COUNT,
        "fundamental scenario index {index} out of range"
    );
    assert!(n_ped_per_flow >= 1, "at least one pedestrian per flow");
    let layout = layout(index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut pedestrians = Vec::new();
    for (f, flow) in layout.flows.iter().enumerate() {
        let dir = unit(flow.heading);
        let lateral = Vec2::new(-dir.y, dir.x);
        let centre = (n_ped_per_flow - 1) as f64 / 2.0;
        for i in 0..n_ped_per_flow {
            let start = flow.start + lateral * ((i as f64 - centre) * FLOW_SPACING);
            pedestrians.push(PedestrianSpec {
                id: format!("f{f}-p{i}"),
                flow: f,
                initial: PedestrianState::at_rest(start),
                destination: start + dir * flow.length,
                desired_speed: rng.random_range(1.2..=1.4),
                release_time: i as f64 * RELEASE_STAGGER,
            });
        }
    }
    let vehicles = layout
        .vehicles
        .iter()
        .enumerate()
        .map(|(k, x)| VehicleSpec {
            id: format!("veh{k}"),
            initial: VehicleState {
                position: Vec2::new(*x, 0.0),
                heading: 0.0,
                speed: cruise_speed,
                center_to_front: HALF_LENGTH,
                center_to_rear: HALF_LENGTH,
                half_width: HALF_WIDTH,
            },
            policy: VehiclePolicy::PurePursuit(PurePursuit::new(
                vec![Vec2::new(*x - 10.0, 0.0), Vec2::new(ROAD_END, 0.0)],
                cruise_speed,
            )),
        })
        .collect();
    ScenarioConfig {
        name: format!("fund-{:02}", index + 1),
        description: format!("{}: {}", Category::of_index(index).label(), layout.description),
        pedestrians,
        vehicles,
        obstacles: vec![],
        t_end: T_END,
        dt: DT,
        seed,
        arrival_radius: 0.3,
    }
}

pub fn build_fundamental_scenarios_seeded(n_ped_per_flow: usize, cruise_speed: f64, seed: u64) -> Vec<ScenarioConfig> {
    (0..FUNDAMENTAL_COUNT)
        .map(|i| fundamental_scenario(i, n_ped_per_flow, cruise_speed, seed))
        .collect()
}

/// All twelve fundamental scenarios with seed 0.
pub fn build_fundamental_scenarios(n_ped_per_flow: usize, cruise_speed: f64) -> Vec<ScenarioConfig> {
    build_fundamental_scenarios_seeded(n_ped_per_flow, cruise_speed, 0)
}
