//! Genetic algorithm with elitism, tournament selection, uniform
//! crossover and Gaussian mutation.

use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub elite_count: usize,
    pub bounds: Vec<(f64, f64)>,
    pub seed: u64,
    /// Initialize the population with Latin-hypercube sampling.
    pub latin_hypercube: bool,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    /// Mutation standard deviation relative to each dimension's range.
    pub mutation_sigma: f64,
    pub tournament: usize,
    /// Known-good candidates injected into the initial population
    /// (clamped to the bounds); with elitism the final cost can never be
    /// worse than the best seed.
    pub seed_candidates: Vec<Vec<f64>>,
}

impl GaConfig {
    pub fn new(population: usize, generations: usize, bounds: Vec<(f64, f64)>, seed: u64) -> Self {
        GaConfig {
            population,
            generations,
            elite_count: 3,
            bounds,
            seed,
            latin_hypercube: true,
            crossover_prob: 0.8,
            mutation_prob: 0.1,
            mutation_sigma: 0.1,
            tournament: 3,
            seed_candidates: Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.bounds.is_empty() {
            return Err(Error::invalid("ga_minimize: empty bounds"));
        }
        if self.elite_count >= self.population {
            return Err(Error::invalid("ga_minimize: elite_count must be < population"));
        }
        for (lo, hi) in &self.bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(format!("ga_minimize: bad bound [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

/// Minimize `objective` over the configured box. Elites survive unchanged
/// each generation so the best cost is non-increasing. Deterministic for
/// a fixed seed; objective evaluations run in parallel and must be pure.
pub fn ga_minimize<F>(objective: F, config: &GaConfig) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    config.validate()?;
    let dim = config.bounds.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut pop: Vec<Vec<f64>> = if config.latin_hypercube {
        latin_hypercube(config.population, &config.bounds, &mut rng)
    } else {
        (0..config.population)
            .map(|_| {
                config
                    .bounds
                    .iter()
                    .map(|&(lo, hi)| rng.random_range(lo..hi))
                    .collect()
            })
            .collect()
    };
    for (i, seed) in config.seed_candidates.iter().enumerate() {
        if i >= pop.len() || seed.len() != dim {
            break;
        }
        pop[i] = seed
            .iter()
            .zip(&config.bounds)
            .map(|(v, &(lo, hi))| v.clamp(lo, hi))
            .collect();
    }
    let mut fitness: Vec<f64> = pop.par_iter().map(|x| objective(x)).collect();

    for _ in 0..config.generations {
        let mut order: Vec<usize> = (0..config.population).collect();
        order.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]));

        let mut next: Vec<Vec<f64>> = Vec::with_capacity(config.population);
        for &i in order.iter().take(config.elite_count) {
            next.push(pop[i].clone());
        }
        while next.len() < config.population {
            let pa = tournament(&fitness, config.tournament, &mut rng);
            let pb = tournament(&fitness, config.tournament, &mut rng);
            let mut child = if rng.random::<f64>() < config.crossover_prob {
                // uniform crossover
                (0..dim)
                    .map(|d| {
                        if rng.random::<f64>() < 0.5 {
                            pop[pa][d]
                        } else {
                            pop[pb][d]
                        }
                    })
                    .collect::<Vec<f64>>()
            } else {
                pop[pa].clone()
            };
            for d in 0..dim {
                if rng.random::<f64>() < config.mutation_prob {
                    let (lo, hi) = config.bounds[d];
                    let sigma = config.mutation_sigma * (hi - lo);
                    child[d] = (child[d] + sigma * gauss(&mut rng)).clamp(lo, hi);
                }
            }
            next.push(child);
        }
        pop = next;
        fitness = pop.par_iter().map(|x| objective(x)).collect();
    }

    let mut best = 0;
    for i in 1..config.population {
        if fitness[i] < fitness[best] {
            best = i;
        }
    }
    Ok((pop[best].clone(), fitness[best]))
}

fn tournament(fitness: &[f64], size: usize, rng: &mut ChaCha8Rng) -> usize {
    let mut winner = rng.random_range(0..fitness.len());
    for _ in 1..size {
        let c = rng.random_range(0..fitness.len());
        if fitness[c] < fitness[winner] {
            winner = c;
        }
    }
    winner
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn latin_hypercube(
    count: usize,
    bounds: &[(f64, f64)],
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<f64>> {
    let dim = bounds.len();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for &(lo, hi) in bounds {
        let mut strata: Vec<f64> = (0..count)
            .map(|i| {
                let u: f64 = rng.random();
                lo + (hi - lo) * ((i as f64 + u) / count as f64)
            })
            .collect();
        strata.shuffle(rng);
        columns.push(strata);
    }
    (0..count)
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect()
}
