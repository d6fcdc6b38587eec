//! Sub-goal social force model for collective pedestrian motion under
//! vehicle influence.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds the force terms, temporary-destination selection, the
//!   force limiter and the integrator that together advance one pedestrian.
//! * [`simulator`] runs whole scenarios with vehicles driven by pluggable
//!   policies and builds the twelve fundamental interaction scenarios.
//! * [`data`] reads and writes the canonical trajectory format and turns
//!   recorded scenes into per-pedestrian samples.
//! * [`calibration`] fits the seven calibrated parameters with a genetic
//!   algorithm, either universally or per behaviour group.
//! * [`evaluation`] scores models with aADE, aFDE and the collision index and
//!   provides the constant-velocity and ordinary social force baselines.
//! * [`plot`] renders trajectories to SVG.

pub mod calibration;
pub mod data;
pub mod evaluation;
pub mod geometry;
pub mod model;
pub mod plot;
pub mod simulator;

pub use geometry::Vec2;
pub use model::{
    ModelParams, ObstacleShape, ParameterSet, PedestrianBody, PedestrianProfile, PedestrianState, Surroundings,
    VehicleState,
};
