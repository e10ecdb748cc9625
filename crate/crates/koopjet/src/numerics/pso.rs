//! Particle swarm optimization with box constraints.

use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Swarm setup. Velocity weights default to the standard constriction
/// values (inertia 0.729, cognitive = social = 1.49).
#[derive(Debug, Clone)]
pub struct SwarmConfig {
    pub population: usize,
    pub bounds: Vec<(f64, f64)>,
    pub max_iters: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub seed: u64,
}

impl SwarmConfig {
    pub fn new(population: usize, bounds: Vec<(f64, f64)>, max_iters: usize, seed: u64) -> Self {
        SwarmConfig {
            population,
            bounds,
            max_iters,
            inertia: 0.729,
            cognitive: 1.49,
            social: 1.49,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.bounds.is_empty() {
            return Err(Error::invalid("pso_minimize: empty bounds"));
        }
        if self.population < 2 {
            return Err(Error::invalid("pso_minimize: population must be >= 2"));
        }
        for (lo, hi) in &self.bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(format!(
                    "pso_minimize: bad bound [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

/// Minimize `objective` over the configured box. Iterates stay inside the
/// bounds by clamping. Deterministic for a fixed seed; objective
/// evaluations run in parallel and must be pure.
pub fn pso_minimize<F>(objective: F, config: &SwarmConfig) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    config.validate()?;
    let dim = config.bounds.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut pos: Vec<Vec<f64>> = (0..config.population)
        .map(|_| {
            config
                .bounds
                .iter()
                .map(|&(lo, hi)| rng.random_range(lo..hi))
                .collect()
        })
        .collect();
    let mut vel: Vec<Vec<f64>> = vec![vec![0.0; dim]; config.population];

    let mut fitness: Vec<f64> = pos.par_iter().map(|x| objective(x)).collect();
    let mut best_pos = pos.clone();
    let mut best_fit = fitness.clone();

    let mut g_idx = argmin(&fitness);
    let mut g_pos = pos[g_idx].clone();
    let mut g_fit = fitness[g_idx];

    let vmax: Vec<f64> = config.bounds.iter().map(|&(lo, hi)| hi - lo).collect();

    for _ in 0..config.max_iters {
        for i in 0..config.population {
            for d in 0..dim {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let v = config.inertia * vel[i][d]
                    + config.cognitive * r1 * (best_pos[i][d] - pos[i][d])
                    + config.social * r2 * (g_pos[d] - pos[i][d]);
                vel[i][d] = v.clamp(-vmax[d], vmax[d]);
                let (lo, hi) = config.bounds[d];
                pos[i][d] = (pos[i][d] + vel[i][d]).clamp(lo, hi);
            }
        }
        fitness = pos.par_iter().map(|x| objective(x)).collect();
        for i in 0..config.population {
            if fitness[i] < best_fit[i] {
                best_fit[i] = fitness[i];
                best_pos[i] = pos[i].clone();
            }
        }
        g_idx = argmin(&best_fit);
        if best_fit[g_idx] < g_fit {
            g_fit = best_fit[g_idx];
            g_pos = best_pos[g_idx].clone();
        }
    }
    Ok((g_pos, g_fit))
}

fn argmin(values: &[f64]) -> usize {
    let mut idx = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[idx] {
            idx = i;
        }
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convex_bowl() {
        let cfg = SwarmConfig::new(60, vec![(-1.0, 1.0); 2], 200, 7);
        let (x, f) = pso_minimize(|x| x.iter().map(|v| v * v).sum(), &cfg).unwrap();
        assert!(x[0].abs() < 1e-3 && x[1].abs() < 1e-3, "argmin {x:?}");
        assert!(f < 1e-6);
    }

    #[test]
    fn rosenbrock() {
        let rosen = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        };
        let cfg = SwarmConfig::new(200, vec![(-2.0, 2.0); 2], 500, 3);
        let (_, f) = pso_minimize(rosen, &cfg).unwrap();
        assert!(f < 1e-4, "rosenbrock min {f}");
    }

    #[test]
    fn penalty_dominates() {
        let obj = |x: &[f64]| {
            let inside = x.iter().all(|v| (0.2..=0.4).contains(v));
            let base: f64 = x.iter().map(|v| (v - 0.3) * (v - 0.3)).sum();
            if inside {
                base
            } else {
                base + 1e6
            }
        };
        let cfg = SwarmConfig::new(80, vec![(0.0, 1.0); 2], 150, 11);
        let (x, _) = pso_minimize(obj, &cfg).unwrap();
        assert!(x.iter().all(|v| (0.2..=0.4).contains(v)), "argmin {x:?}");
    }

    #[test]
    fn monotone_vs_initial_population_and_deterministic() {
        let obj = |x: &[f64]| (x[0] - 0.123).abs() + (x[1] + 0.5).powi(2);
        let cfg = SwarmConfig::new(30, vec![(-1.0, 1.0); 2], 50, 99);
        let (x1, f1) = pso_minimize(obj, &cfg).unwrap();
        let (x2, f2) = pso_minimize(obj, &cfg).unwrap();
        assert_eq!(x1, x2);
        assert_eq!(f1, f2);
        // returned value can never exceed any evaluated point's value,
        // in particular the best of the initial population
        assert!(f1 <= obj(&[0.0, 0.0]));
    }

    #[test]
    fn empty_bounds_rejected() {
        let cfg = SwarmConfig::new(10, vec![], 10, 0);
        assert!(pso_minimize(|_| 0.0, &cfg).is_err());
    }
}
