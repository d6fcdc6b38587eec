use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataSample;
use crate::model::ParameterSet;

use super::{
    check_samples, cluster_groups, ga_calibrate, inertia_curve, sample_fitness, CalibrationError, GaConfig, GaResult,
    ThetaVector,
};

const ELBOW_MAX_K: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupCalibration {
    pub theta: ThetaVector,
    /// Fitness over the group's own samples; `None` for an empty group.
    pub fitness: Option<f64>,
    pub trace: Vec<f64>,
    pub members: Vec<usize>,
    /// Empty after clustering, so the universal vector was used.
    pub inherited: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupModel {
    pub groups: Vec<GroupCalibration>,
    /// Group of each sample, in sample order.
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia_curve: Vec<f64>,
    pub features: Vec<ThetaVector>,
}

impl GroupModel {
    pub fn theta_for(&self, sample: usize) -> &ThetaVector {
        &self.groups[self.assignments[sample]].theta
    }

    /// Mean per-sample fitness with each sample under its group's vector.
    pub fn fitness(&self, samples: &[DataSample], base: &ParameterSet) -> f64 {
        let errs: Vec<f64> = samples
            .par_iter()
            .enumerate()
            .map(|(i, s)| sample_fitness(self.theta_for(i), s, base))
            .collect();
        errs.iter().sum::<f64>() / errs.len() as f64
    }
}

/// Calibrates every sample on its own with `cfg` (normally a short run).
/// Every sample uses the same GA seed, so the result for one sample does not
/// depend on the others.
pub fn individual_features(
    samples: &[DataSample],
    base: &ParameterSet,
    cfg: &GaConfig,
    seed_theta: &ThetaVector,
) -> Result<Vec<ThetaVector>, CalibrationError> {
    check_samples(samples)?;
    samples
        .par_iter()
        .map(|s| ga_calibrate(std::slice::from_ref(s), base, cfg, seed_theta).map(|r| r.best))
        .collect()
}

/// Individual calibration, k-means over the resulting vectors, then one GA
/// per group. Group `i` runs with seed `cfg.seed + i`, so `k = 1` reproduces
/// the universal calibration exactly.
pub fn group_calibrate(
    samples: &[DataSample],
    base: &ParameterSet,
    cfg: &GaConfig,
    feature_cfg: &GaConfig,
    seed_theta: &ThetaVector,
    k: usize,
) -> Result<GroupModel, CalibrationError> {
    check_samples(samples)?;
    if k == 0 || k > samples.len() {
        return Err(CalibrationError::TooFewSamples { k, n: samples.len() });
    }
    let features = individual_features(samples, base, feature_cfg, seed_theta)?;
    let clustering = cluster_groups(&features, k, cfg.seed)?;
    let curve = inertia_curve(&features, ELBOW_MAX_K, cfg.seed)?;
    let mut universal: Option<GaResult> = None;
    let mut groups = Vec::with_capacity(k);
    for g in 0..k {
        let members: Vec<usize> = (0..samples.len()).filter(|i| clustering.assignments[*i] == g).collect();
        if members.is_empty() {
            if universal.is_none() {
                universal = Some(ga_calibrate(samples, base, cfg, seed_theta)?);
            }
            let u = universal.as_ref().unwrap();
            groups.push(GroupCalibration {
                theta: u.best,
                fitness: None,
                trace: vec![],
                members,
                inherited: true,
            });
            continue;
        }
        let subset: Vec<DataSample> = members.iter().map(|i| samples[*i].clone()).collect();
        let group_cfg = GaConfig {
            seed: cfg.seed.wrapping_add(g as u64),
            ..cfg.clone()
        };
        let r = ga_calibrate(&subset, base, &group_cfg, seed_theta)?;
        groups.push(GroupCalibration {
            theta: r.best,
            fitness: Some(r.best_fitness),
            trace: r.trace,
            members,
            inherited: false,
        });
    }
    Ok(GroupModel {
        groups,
        assignments: clustering.assignments,
        centroids: clustering.centroids,
        inertia_curve: curve,
        features,
    })
}
