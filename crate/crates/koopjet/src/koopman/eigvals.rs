//! Eigenvalue discovery by swarm optimization of the temporal-projection
//! objective.

use super::basis::{
    eig_objective_complex, eig_objective_real, merge_complex, merge_real, ModeBlock,
    projection_objective, BETA_MERGE, MERGE_TOL, RATIO_MAX,
};
use super::{EigEntry, EigenvalueSet, MultiplicityTag};
use crate::error::{Error, Result};
use crate::numerics::{pso_minimize, SwarmConfig};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMode {
    Real,
    Complex,
}

#[derive(Debug, Clone)]
pub struct EigOptConfig {
    /// Real-part search interval (both bounds negative).
    pub alpha_bounds: (f64, f64),
    /// Imaginary-part upper bound.
    pub beta_max: f64,
    /// Projection regularization.
    pub alpha_k: f64,
    pub merge_tol: f64,
    pub beta_merge: f64,
    pub ratio_max: f64,
}

impl Default for EigOptConfig {
    fn default() -> Self {
        EigOptConfig {
            alpha_bounds: (-10.0, -0.3),
            beta_max: 10.0,
            alpha_k: 1e-8,
            merge_tol: MERGE_TOL,
            beta_merge: BETA_MERGE,
            ratio_max: RATIO_MAX,
        }
    }
}

/// Optimize an `n_modes`-dimensional spectrum against the autonomous
/// trajectories. Complex mode searches conjugate pairs, so `n_modes`
/// must be even there. Constraints are enforced by swarm clamping plus
/// the exclusion rules inside the objective.
pub fn optimize_eigenvalues(
    n_traj: &DMatrix<f64>,
    t_grid: &[f64],
    n_modes: usize,
    mode: SpectrumMode,
    swarm: &SwarmConfig,
    cfg: &EigOptConfig,
) -> Result<EigenvalueSet> {
    if n_modes == 0 {
        return Err(Error::invalid("optimize_eigenvalues: zero modes requested"));
    }
    if t_grid.len() != n_traj.ncols() {
        return Err(Error::invalid(
            "optimize_eigenvalues: grid length does not match trajectories",
        ));
    }
    let (set, blocks) = match mode {
        SpectrumMode::Real => {
            let bounds = vec![cfg.alpha_bounds; n_modes];
            let sw = SwarmConfig { bounds, ..swarm.clone() };
            let (best, j) = pso_minimize(
                |x| eig_objective_real(x, n_traj, t_grid, cfg.merge_tol, cfg.alpha_k),
                &sw,
            )?;
            if j >= 1e6 {
                return Err(Error::Infeasible(
                    "optimize_eigenvalues: all real modes rejected".into(),
                ));
            }
            let blocks = merge_real(&best, cfg.merge_tol);
            let mut entries = Vec::new();
            for b in &blocks {
                match *b {
                    ModeBlock::Real { lambda } => entries.push(EigEntry {
                        alpha: lambda,
                        beta: 0.0,
                        tag: MultiplicityTag::Distinct,
                    }),
                    ModeBlock::RepeatedReal { lambda } => {
                        for _ in 0..2 {
                            entries.push(EigEntry {
                                alpha: lambda,
                                beta: 0.0,
                                tag: MultiplicityTag::RepeatedSecular,
                            });
                        }
                    }
                    _ => unreachable!("real optimization produced complex block"),
                }
            }
            (
                EigenvalueSet { entries, objective: j, mae: 0.0 },
                blocks,
            )
        }
        SpectrumMode::Complex => {
            if n_modes % 2 != 0 {
                return Err(Error::invalid(
                    "optimize_eigenvalues: complex mode needs an even order",
                ));
            }
            let pairs = n_modes / 2;
            let mut bounds = Vec::with_capacity(n_modes);
            for _ in 0..pairs {
                bounds.push(cfg.alpha_bounds);
                bounds.push((0.0, cfg.beta_max));
            }
            let sw = SwarmConfig { bounds, ..swarm.clone() };
            let objective = |x: &[f64]| {
                let pairs: Vec<(f64, f64)> = x.chunks(2).map(|c| (c[0], c[1])).collect();
                eig_objective_complex(&pairs, n_traj, t_grid, cfg.alpha_k)
            };
            let (best, j) = pso_minimize(objective, &sw)?;
            if j >= 1e6 {
                return Err(Error::Infeasible(
                    "optimize_eigenvalues: every complex mode excluded".into(),
                ));
            }
            let best_pairs: Vec<(f64, f64)> = best.chunks(2).map(|c| (c[0], c[1])).collect();
            let blocks = merge_complex(&best_pairs, cfg.beta_merge, cfg.ratio_max, cfg.merge_tol);
            let mut entries = Vec::new();
            for b in &blocks {
                match *b {
                    ModeBlock::Real { lambda } => {
                        entries.push(EigEntry {
                            alpha: lambda,
                            beta: 0.0,
                            tag: MultiplicityTag::Distinct,
                        });
                        // the conjugate partner collapses away
                        entries.push(EigEntry {
                            alpha: lambda,
                            beta: 0.0,
                            tag: MultiplicityTag::MergedOut,
                        });
                    }
                    ModeBlock::Complex { alpha, beta } => entries.push(EigEntry {
                        alpha,
                        beta,
                        tag: MultiplicityTag::Distinct,
                    }),
                    ModeBlock::ComplexSecular { alpha, beta } => {
                        for _ in 0..2 {
                            entries.push(EigEntry {
                                alpha,
                                beta,
                                tag: MultiplicityTag::RepeatedSecular,
                            });
                        }
                    }
                    ModeBlock::RepeatedReal { .. } => {
                        unreachable!("complex optimization produced repeated-real block")
                    }
                }
            }
            (
                EigenvalueSet { entries, objective: j, mae: 0.0 },
                blocks,
            )
        }
    };
    let (_, k) = projection_objective(&blocks, n_traj, t_grid, cfg.alpha_k)?;
    let e = super::basis::exp_basis(&blocks, t_grid)?;
    let resid = n_traj - &k * &e;
    let mae = resid.iter().map(|v| v.abs()).sum::<f64>() / (resid.len() as f64);
    Ok(EigenvalueSet { mae, ..set })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, dt: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * dt).collect()
    }

    #[test]
    fn recovers_two_real_modes() {
        let t = grid(1500, 0.01);
        let truth = [-0.5, -3.0];
        let n_traj = DMatrix::from_fn(4, t.len(), |r, k| {
            let (a, b) = match r {
                0 => (1.0, 0.0),
                1 => (0.6, 0.4),
                2 => (0.3, 0.7),
                _ => (0.8, -0.3),
            };
            a * (truth[0] * t[k]).exp() + b * (truth[1] * t[k]).exp()
        });
        let swarm = SwarmConfig::new(80, vec![], 150, 11);
        let set = optimize_eigenvalues(
            &n_traj,
            &t,
            2,
            SpectrumMode::Real,
            &swarm,
            &EigOptConfig::default(),
        )
        .unwrap();
        let mut found: Vec<f64> = set.entries.iter().map(|e| e.alpha).collect();
        found.sort_by(|a, b| b.total_cmp(a));
        assert!(
            (found[0] - truth[0]).abs() / truth[0].abs() < 0.02,
            "slow mode {found:?}"
        );
        assert!(
            (found[1] - truth[1]).abs() / truth[1].abs() < 0.02,
            "fast mode {found:?}"
        );
        assert!(set.mae < 1e-4, "mae {}", set.mae);
    }

    #[test]
    fn complex_recovery_single_pair() {
        let t = grid(1500, 0.01);
        let n_traj = DMatrix::from_fn(3, t.len(), |r, k| {
            let phase = 0.4 * r as f64;
            (-1.2 * t[k]).exp() * (2.0 * t[k] + phase).cos()
        });
        let swarm = SwarmConfig::new(120, vec![], 200, 5);
        let set = optimize_eigenvalues(
            &n_traj,
            &t,
            2,
            SpectrumMode::Complex,
            &swarm,
            &EigOptConfig::default(),
        )
        .unwrap();
        let e = &set.entries[0];
        assert!((e.alpha + 1.2).abs() < 0.05, "alpha {}", e.alpha);
        assert!((e.beta - 2.0).abs() < 0.05, "beta {}", e.beta);
    }

    #[test]
    fn rejects_bad_inputs() {
        let t = grid(10, 0.01);
        let n_traj = DMatrix::zeros(1, 10);
        let swarm = SwarmConfig::new(10, vec![], 5, 0);
        assert!(optimize_eigenvalues(
            &n_traj,
            &t,
            0,
            SpectrumMode::Real,
            &swarm,
            &EigOptConfig::default()
        )
        .is_err());
        assert!(optimize_eigenvalues(
            &n_traj,
            &t,
            3,
            SpectrumMode::Complex,
            &swarm,
            &EigOptConfig::default()
        )
        .is_err());
    }
}
