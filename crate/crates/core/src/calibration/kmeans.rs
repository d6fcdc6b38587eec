//! k-means with k-means++ seeding on per-dimension standardized features.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CalibrationError, ThetaVector};

const RESTARTS: usize = 10;
const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub k: usize,
    /// Group of each feature vector.
    pub assignments: Vec<usize>,
    /// Centroids back in parameter units.
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared standardized distances to the assigned centroid.
    pub inertia: f64,
}

fn standardize(features: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let n = features.len() as f64;
    let dim = features[0].len();
    let mean: Vec<f64> = (0..dim)
        .map(|d| features.iter().map(|f| f[d]).sum::<f64>() / n)
        .collect();
    let sd: Vec<f64> = (0..dim)
        .map(|d| {
            let var = features.iter().map(|f| (f[d] - mean[d]).powi(2)).sum::<f64>() / n;
            if var > 0.0 {
                var.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let z = features
        .iter()
        .map(|f| (0..dim).map(|d| (f[d] - mean[d]) / sd[d]).collect())
        .collect();
    (z, mean, sd)
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = dist2(p, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn plus_plus(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids = vec![points[rng.random_range(0..points.len())].clone()];
    while centroids.len() < k {
        let d: Vec<f64> = points.iter().map(|p| nearest(p, &centroids).1).collect();
        let total: f64 = d.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            d.iter()
                .position(|w| {
                    r -= w;
                    r <= 0.0
                })
                .unwrap_or(points.len() - 1)
        } else {
            rng.random_range(0..points.len())
        };
        centroids.push(points[pick].clone());
    }
    centroids
}

fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>) -> (Vec<usize>, Vec<Vec<f64>>, f64) {
    let dim = points[0].len();
    let k = centroids.len();
    let mut assign = vec![usize::MAX; points.len()];
    for _ in 0..MAX_ITERATIONS {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let c = nearest(p, &centroids).0;
            if assign[i] != c {
                assign[i] = c;
                changed = true;
            }
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, c) in points.iter().zip(&assign) {
            counts[*c] += 1;
            for d in 0..dim {
                sums[*c][d] += p[d];
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // re-seed an empty cluster at the point farthest from its centroid
                let far = (0..points.len())
                    .max_by(|a, b| {
                        dist2(&points[*a], &centroids[assign[*a]])
                            .total_cmp(&dist2(&points[*b], &centroids[assign[*b]]))
                    })
                    .unwrap();
                centroids[c] = points[far].clone();
                assign[far] = c;
                changed = true;
            } else {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        if !changed {
            break;
        }
    }
    let inertia = points.iter().zip(&assign).map(|(p, c)| dist2(p, &centroids[*c])).sum();
    (assign, centroids, inertia)
}

/// Clusters feature vectors into `k` groups. Deterministic for a given seed:
/// the best of several k-means++ restarts drawn from one stream.
pub fn cluster_groups(features: &[ThetaVector], k: usize, seed: u64) -> Result<Clustering, CalibrationError> {
    if k == 0 || k > features.len() {
        return Err(CalibrationError::TooFewSamples { k, n: features.len() });
    }
    let raw: Vec<Vec<f64>> = features.iter().map(|t| t.genes().to_vec()).collect();
    let (points, mean, sd) = standardize(&raw);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<usize>, Vec<Vec<f64>>, f64)> = None;
    for _ in 0..RESTARTS {
        let run = lloyd(&points, plus_plus(&points, k, &mut rng));
        if best.as_ref().is_none_or(|b| run.2 < b.2) {
            best = Some(run);
        }
    }
    let (assignments, centroids, inertia) = best.unwrap();
    let centroids = centroids
        .into_iter()
        .map(|c| c.iter().enumerate().map(|(d, z)| z * sd[d] + mean[d]).collect())
        .collect();
    Ok(Clustering {
        k,
        assignments,
        centroids,
        inertia,
    })
}

/// Inertia for `k = 1..=max_k` (capped at the feature count), for choosing
/// `k` by the elbow.
pub fn inertia_curve(features: &[ThetaVector], max_k: usize, seed: u64) -> Result<Vec<f64>, CalibrationError> {
    (1..=max_k.min(features.len()))
        .map(|k| cluster_groups(features, k, seed).map(|c| c.inertia))
        .collect()
}
