//! Genetic-algorithm calibration of the seven-parameter vector against
//! recorded samples, universal or per behaviour group.

mod ga;
mod group;
mod kmeans;
mod report;
mod synthetic;

pub use ga::{ga_calibrate, GaConfig, GaResult};
pub use group::{group_calibrate, individual_features, GroupCalibration, GroupModel};
pub use kmeans::{cluster_groups, inertia_curve, Clustering};
pub use report::{CalibrationMode, CalibrationReport};
pub use synthetic::{synthesize_sample, synthetic_dataset, SyntheticConfig};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataSample;
use crate::geometry::Vec2;
use crate::model::{
    pedestrian_model_step, ModelParams, ParameterSet, PedestrianProfile, PedestrianState, Surroundings,
};

pub const GENE_COUNT: usize = 7;
pub const GENE_NAMES: [&str; GENE_COUNT] = [
    "ped_decay",
    "veh_decay",
    "prediction_horizon",
    "longitudinal_buffer",
    "nav_gain",
    "direction_count",
    "nav_range",
];

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CalibrationError {
    #[error("no samples to calibrate on")]
    NoSamples,
    #[error("invalid GA configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot form {k} groups from {n} samples")]
    TooFewSamples { k: usize, n: usize },
    #[error("invalid sample: {0}")]
    InvalidSample(String),
}

/// The calibrated subset of [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaVector {
    pub ped_decay: f64,
    pub veh_decay: f64,
    pub prediction_horizon: f64,
    pub longitudinal_buffer: f64,
    pub nav_gain: f64,
    pub direction_count: u32,
    pub nav_range: f64,
}

impl Default for ThetaVector {
    fn default() -> Self {
        Self::from_params(&ModelParams::default())
    }
}

impl ThetaVector {
    pub fn from_params(p: &ModelParams) -> Self {
        Self {
            ped_decay: p.ped_decay,
            veh_decay: p.veh_decay,
            prediction_horizon: p.prediction_horizon,
            longitudinal_buffer: p.longitudinal_buffer,
            nav_gain: p.nav_gain,
            direction_count: p.direction_count,
            nav_range: p.nav_range,
        }
    }

    /// `base` with the seven calibrated fields replaced.
    pub fn apply(&self, base: &ModelParams) -> ModelParams {
        ModelParams {
            ped_decay: self.ped_decay,
            veh_decay: self.veh_decay,
            prediction_horizon: self.prediction_horizon,
            longitudinal_buffer: self.longitudinal_buffer,
            nav_gain: self.nav_gain,
            direction_count: self.direction_count,
            nav_range: self.nav_range,
            ..*base
        }
    }

    pub fn genes(&self) -> [f64; GENE_COUNT] {
        [
            self.ped_decay,
            self.veh_decay,
            self.prediction_horizon,
            self.longitudinal_buffer,
            self.nav_gain,
            self.direction_count as f64,
            self.nav_range,
        ]
    }

    /// Decodes real-valued genes, clipping to `bounds` and rounding the
    /// direction count to the nearest even integer inside them.
    pub fn from_genes(genes: &[f64; GENE_COUNT], bounds: &ThetaBounds) -> Self {
        let g: Vec<f64> = genes
            .iter()
            .zip(&bounds.0)
            .map(|(x, (lo, hi))| x.clamp(*lo, *hi))
            .collect();
        let (lo, hi) = bounds.0[5];
        let (even_lo, even_hi) = ((lo / 2.0).ceil() * 2.0, (hi / 2.0).floor() * 2.0);
        let n = ((g[5] / 2.0).round() * 2.0).clamp(even_lo, even_hi);
        Self {
            ped_decay: g[0],
            veh_decay: g[1],
            prediction_horizon: g[2],
            longitudinal_buffer: g[3],
            nav_gain: g[4],
            direction_count: n as u32,
            nav_range: g[6],
        }
    }
}

/// Closed interval per gene, in [`GENE_NAMES`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaBounds(pub [(f64, f64); GENE_COUNT]);

impl Default for ThetaBounds {
    fn default() -> Self {
        Self([
            (0.5, 3.0),
            (0.5, 3.6),
            (2.0, 5.0),
            (0.5, 1.0),
            (200.0, 800.0),
            (80.0, 120.0),
            (3.0, 7.0),
        ])
    }
}

impl ThetaBounds {
    pub fn contains(&self, theta: &ThetaVector) -> bool {
        theta
            .genes()
            .iter()
            .zip(&self.0)
            .all(|(x, (lo, hi))| x >= lo && x <= hi)
            && theta.direction_count % 2 == 0
    }

    pub fn range(&self, gene: usize) -> f64 {
        self.0[gene].1 - self.0[gene].0
    }

    pub fn validate(&self) -> Result<(), CalibrationError> {
        for (name, (lo, hi)) in GENE_NAMES.iter().zip(&self.0) {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi && *lo > 0.0) {
                return Err(CalibrationError::InvalidConfig(format!(
                    "bad bounds for {name}: [{lo}, {hi}]"
                )));
            }
        }
        let (lo, hi) = self.0[5];
        if (lo / 2.0).ceil() * 2.0 > hi || lo < 2.0 {
            return Err(CalibrationError::InvalidConfig(
                "direction_count bounds hold no even value >= 2".into(),
            ));
        }
        Ok(())
    }
}

/// Replays a sample with any pedestrian step function: the ego starts from
/// its recorded initial state and every other agent follows the recording.
pub fn replay_with<F>(sample: &DataSample, mut step: F) -> Vec<Vec2>
where
    F: FnMut(&PedestrianState, &Surroundings<'_>) -> PedestrianState,
{
    let mut state = sample.initial_state();
    let mut out = Vec::with_capacity(sample.ego.len());
    out.push(state.position);
    for frame in &sample.frames[..sample.steps()] {
        state = step(&state, &frame.surroundings(&sample.obstacles));
        out.push(state.position);
    }
    out
}

/// Simulated ego trajectory (`k + 1` points) under `theta`.
pub fn simulate_sample(theta: &ThetaVector, sample: &DataSample, base: &ParameterSet) -> Vec<Vec2> {
    let params = theta.apply(&base.model);
    let profile = PedestrianProfile::new(base.body, sample.desired_speed, sample.destination);
    replay_with(sample, |s, sur| {
        pedestrian_model_step(s, &profile, sur, &params, sample.dt)
    })
}

/// Mean displacement over steps `1..=k`.
pub fn displacement_error(sim: &[Vec2], gt: &[Vec2]) -> f64 {
    assert_eq!(sim.len(), gt.len(), "trajectory lengths differ");
    assert!(sim.len() >= 2, "trajectory needs at least 2 points");
    let k = sim.len() - 1;
    sim[1..].iter().zip(&gt[1..]).map(|(a, b)| (a - b).norm()).sum::<f64>() / k as f64
}

pub fn sample_fitness(theta: &ThetaVector, sample: &DataSample, base: &ParameterSet) -> f64 {
    displacement_error(&simulate_sample(theta, sample, base), &sample.ego)
}

/// Per-sample errors, in sample order.
pub fn sample_fitnesses(theta: &ThetaVector, samples: &[DataSample], base: &ParameterSet) -> Vec<f64> {
    samples.par_iter().map(|s| sample_fitness(theta, s, base)).collect()
}

/// Mean over samples of the per-sample mean displacement. Reduction order is
/// fixed, so the value does not depend on the thread count.
pub fn fitness(theta: &ThetaVector, samples: &[DataSample], base: &ParameterSet) -> f64 {
    assert!(!samples.is_empty(), "fitness needs at least one sample");
    let errs = sample_fitnesses(theta, samples, base);
    errs.iter().sum::<f64>() / errs.len() as f64
}

pub(crate) fn check_samples(samples: &[DataSample]) -> Result<(), CalibrationError> {
    if samples.is_empty() {
        return Err(CalibrationError::NoSamples);
    }
    for s in samples {
        s.validate().map_err(CalibrationError::InvalidSample)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Frame;
    use approx::assert_abs_diff_eq;

    pub(crate) fn straight_sample(offset: f64) -> DataSample {
        let ego: Vec<Vec2> = (0..9).map(|i| Vec2::new(0.6 * i as f64, offset)).collect();
        DataSample {
            scenario_id: "s".into(),
            ego_id: "e".into(),
            dt: 0.5,
            start_step: 0,
            initial_velocity: Vec2::new(1.2, 0.0),
            frames: vec![Frame::default(); ego.len()],
            ego,
            obstacles: vec![],
            destination: Vec2::new(20.0, offset),
            desired_speed: 1.2,
        }
    }

    #[test]
    fn genes_round_trip_and_round_even() {
        let b = ThetaBounds::default();
        let t = ThetaVector::default();
        assert_eq!(ThetaVector::from_genes(&t.genes(), &b), t);
        let mut g = t.genes();
        g[5] = 92.9;
        assert_eq!(ThetaVector::from_genes(&g, &b).direction_count, 92);
        g[5] = 93.1;
        assert_eq!(ThetaVector::from_genes(&g, &b).direction_count, 94);
        g[5] = 500.0;
        g[0] = -3.0;
        let c = ThetaVector::from_genes(&g, &b);
        assert_eq!(c.direction_count, 120);
        assert_eq!(c.ped_decay, 0.5);
        assert!(b.contains(&c));
        assert!(b.contains(&ThetaVector::default()));
    }

    #[test]
    fn apply_touches_only_calibrated_fields() {
        let base = ModelParams::default();
        let mut t = ThetaVector::default();
        t.nav_gain = 321.0;
        let p = t.apply(&base);
        assert_eq!(p.nav_gain, 321.0);
        assert_eq!(p.ped_strength, base.ped_strength);
        assert_eq!(p.target_softening, base.target_softening);
    }

    #[test]
    fn simulation_starts_at_ground_truth() {
        let s = straight_sample(0.0);
        let sim = simulate_sample(&ThetaVector::default(), &s, &ParameterSet::default());
        assert_eq!(sim.len(), s.ego.len());
        assert_eq!(sim[0], s.ego[0]);
    }

    #[test]
    fn displacement_error_of_constant_offset() {
        let a: Vec<Vec2> = (0..6).map(|i| Vec2::new(i as f64, 0.0)).collect();
        let mut b = a.clone();
        assert_eq!(displacement_error(&a, &b), 0.0);
        for p in b.iter_mut().skip(1) {
            p.y += 1.0;
        }
        assert_abs_diff_eq!(displacement_error(&a, &b), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fitness_is_mean_over_samples() {
        let base = ParameterSet::default();
        let t = ThetaVector::default();
        let (s1, mut s2) = (straight_sample(0.0), straight_sample(1.0));
        s2.destination = Vec2::new(5.0, 8.0);
        let f1 = fitness(&t, std::slice::from_ref(&s1), &base);
        let f2 = fitness(&t, std::slice::from_ref(&s2), &base);
        assert_abs_diff_eq!(fitness(&t, &[s1, s2], &base), (f1 + f2) / 2.0, epsilon = 1e-12);
    }
}
