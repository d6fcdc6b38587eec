use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataSample;
use crate::model::ParameterSet;

use super::{check_samples, fitness, CalibrationError, ThetaBounds, ThetaVector, GENE_COUNT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population: usize,
    pub elites: usize,
    pub tournament: usize,
    pub crossover_rate: f64,
    /// Per-gene probability of a Gaussian perturbation.
    pub mutation_rate: f64,
    /// Perturbation standard deviation as a fraction of the gene range.
    pub mutation_scale: f64,
    pub generations: usize,
    pub seed: u64,
    pub bounds: ThetaBounds,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 50,
            elites: 4,
            tournament: 3,
            crossover_rate: 0.7,
            mutation_rate: 0.2,
            mutation_scale: 0.1,
            generations: 50,
            seed: 0,
            bounds: ThetaBounds::default(),
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), CalibrationError> {
        let bad = |m: &str| Err(CalibrationError::InvalidConfig(m.into()));
        if self.population == 0 {
            return bad("population must be > 0");
        }
        if self.elites > self.population {
            return bad("more elites than individuals");
        }
        if self.tournament == 0 {
            return bad("tournament size must be > 0");
        }
        for (name, r) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return Err(CalibrationError::InvalidConfig(format!("{name} must be in [0, 1]")));
            }
        }
        if !(self.mutation_scale >= 0.0 && self.mutation_scale.is_finite()) {
            return bad("mutation_scale must be >= 0");
        }
        self.bounds.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaResult {
    pub best: ThetaVector,
    pub best_fitness: f64,
    /// Best fitness of the initial population, then after each generation.
    pub trace: Vec<f64>,
    pub evaluations: usize,
}

#[derive(Clone)]
struct Individual {
    genes: [f64; GENE_COUNT],
    fitness: Option<f64>,
}

fn clip(genes: &mut [f64; GENE_COUNT], bounds: &ThetaBounds) {
    for (g, (lo, hi)) in genes.iter_mut().zip(&bounds.0) {
        *g = g.clamp(*lo, *hi);
    }
}

fn mutate(genes: &mut [f64; GENE_COUNT], cfg: &GaConfig, rate: f64, rng: &mut ChaCha8Rng) {
    for (i, g) in genes.iter_mut().enumerate() {
        if rng.random::<f64>() < rate {
            let sd = cfg.mutation_scale * cfg.bounds.range(i);
            if sd > 0.0 {
                *g += Normal::new(0.0, sd).expect("finite sd").sample(rng);
            }
        }
    }
    clip(genes, &cfg.bounds);
}

/// BLX-0.5 blend crossover.
fn blend(a: &[f64; GENE_COUNT], b: &[f64; GENE_COUNT], rng: &mut ChaCha8Rng) -> [f64; GENE_COUNT] {
    let mut child = [0.0; GENE_COUNT];
    for i in 0..GENE_COUNT {
        let (lo, hi) = (a[i].min(b[i]), a[i].max(b[i]));
        let ext = 0.5 * (hi - lo);
        child[i] = if hi > lo {
            rng.random_range(lo - ext..=hi + ext)
        } else {
            lo
        };
    }
    child
}

fn tournament<'a>(pop: &'a [Individual], size: usize, rng: &mut ChaCha8Rng) -> &'a Individual {
    let mut best = &pop[rng.random_range(0..pop.len())];
    for _ in 1..size {
        let c = &pop[rng.random_range(0..pop.len())];
        if c.fitness < best.fitness {
            best = c;
        }
    }
    best
}

/// Real-coded GA over the bound box. Individual 0 is `seed_theta`, the rest
/// are mutations of it with every gene perturbed. Each generation keeps the
/// elites unchanged and fills the rest by tournament selection, blend
/// crossover and Gaussian mutation.
pub fn ga_calibrate(
    samples: &[DataSample],
    base: &ParameterSet,
    cfg: &GaConfig,
    seed_theta: &ThetaVector,
) -> Result<GaResult, CalibrationError> {
    cfg.validate()?;
    check_samples(samples)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut seed_genes = seed_theta.genes();
    clip(&mut seed_genes, &cfg.bounds);
    let mut pop: Vec<Individual> = (0..cfg.population)
        .map(|i| {
            let mut genes = seed_genes;
            if i > 0 {
                mutate(&mut genes, cfg, 1.0, &mut rng);
            }
            Individual { genes, fitness: None }
        })
        .collect();

    let mut trace = Vec::with_capacity(cfg.generations + 1);
    let mut evaluations = 0;
    for generation in 0..=cfg.generations {
        let pending: Vec<usize> = (0..pop.len()).filter(|i| pop[*i].fitness.is_none()).collect();
        let scores: Vec<f64> = pending
            .par_iter()
            .map(|i| fitness(&ThetaVector::from_genes(&pop[*i].genes, &cfg.bounds), samples, base))
            .collect();
        evaluations += scores.len();
        for (i, f) in pending.into_iter().zip(scores) {
            pop[i].fitness = Some(if f.is_nan() { f64::INFINITY } else { f });
        }
        // stable, so ties keep their earlier position
        pop.sort_by(|a, b| a.fitness.unwrap().total_cmp(&b.fitness.unwrap()));
        trace.push(pop[0].fitness.unwrap());
        log::debug!("generation {generation}: best {:.6}", pop[0].fitness.unwrap());
        if generation == cfg.generations {
            break;
        }
        let mut next: Vec<Individual> = pop[..cfg.elites].to_vec();
        while next.len() < cfg.population {
            let a = tournament(&pop, cfg.tournament, &mut rng).genes;
            let mut genes = if rng.random::<f64>() < cfg.crossover_rate {
                let b = tournament(&pop, cfg.tournament, &mut rng).genes;
                blend(&a, &b, &mut rng)
            } else {
                a
            };
            mutate(&mut genes, cfg, cfg.mutation_rate, &mut rng);
            next.push(Individual { genes, fitness: None });
        }
        pop = next;
    }
    Ok(GaResult {
        best: ThetaVector::from_genes(&pop[0].genes, &cfg.bounds),
        best_fitness: pop[0].fitness.unwrap(),
        trace,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::tests::straight_sample;

    fn small() -> GaConfig {
        GaConfig {
            population: 8,
            elites: 2,
            generations: 4,
            seed: 3,
            ..GaConfig::default()
        }
    }

    #[test]
    fn deterministic_and_elitist() {
        let samples = vec![straight_sample(0.0), straight_sample(0.5)];
        let base = ParameterSet::default();
        let a = ga_calibrate(&samples, &base, &small(), &ThetaVector::default()).unwrap();
        let b = ga_calibrate(&samples, &base, &small(), &ThetaVector::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trace.len(), 5);
        assert!(a.trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(small().bounds.contains(&a.best));
        assert_eq!(a.best_fitness, *a.trace.last().unwrap());
        assert_eq!(a.evaluations, 8 + 4 * 6);
    }

    #[test]
    fn rejects_bad_config() {
        let s = vec![straight_sample(0.0)];
        let base = ParameterSet::default();
        let mut c = small();
        c.elites = 9;
        assert!(ga_calibrate(&s, &base, &c, &ThetaVector::default()).is_err());
        let mut c = small();
        c.mutation_rate = 1.5;
        assert!(ga_calibrate(&s, &base, &c, &ThetaVector::default()).is_err());
        assert_eq!(
            ga_calibrate(&[], &base, &small(), &ThetaVector::default()),
            Err(CalibrationError::NoSamples)
        );
    }
}
