//! Mode-amplitude projection: express the spool speed as a linear
//! combination of the fitted eigenfunctions.

use super::kem::KemBlock;
use crate::error::Result;
use crate::numerics::ridge_solve;
use nalgebra::{DMatrix, DVector};

/// Contribution threshold under which an amplitude is pruned to zero.
const PRUNE_CONTRIBUTION: f64 = 1e-5;

fn prune(mut c: DVector<f64>, phi: &DMatrix<f64>) -> DVector<f64> {
    for i in 0..c.len() {
        let max_phi = (0..phi.ncols()).map(|j| phi[(i, j)].abs()).fold(0.0, f64::max);
        if (c[i] * max_phi).abs() <= PRUNE_CONTRIBUTION {
            c[i] = 0.0;
        }
    }
    c
}

/// Spatial projection: fit `N ~ C Phi(N)` over a dense grid.
pub fn fit_modes_spatial(blocks: &[KemBlock], grid: &[f64], alpha_c: f64) -> Result<DVector<f64>> {
    let dim: usize = blocks.iter().map(|b| b.states()).sum();
    let mut phi = DMatrix::zeros(dim, grid.len());
    for (j, &x) in grid.iter().enumerate() {
        let col = KemBlock::eval_stack(blocks, x);
        phi.set_column(j, &col);
    }
    let y = DMatrix::from_fn(1, grid.len(), |_, j| grid[j]);
    let k = ridge_solve(&phi, &y, alpha_c)?;
    let c = DVector::from_fn(dim, |i, _| k[(0, i)]);
    Ok(prune(c, &phi))
}

/// Temporal projection: fit the autonomous trajectories against the
/// analytic block evolution of the eigenfunction states.
pub fn fit_modes_temporal(
    blocks: &[KemBlock],
    initial_conditions: &[f64],
    t_grid: &[f64],
    n_traj: &DMatrix<f64>,
    alpha_c: f64,
) -> Result<DVector<f64>> {
    let dim: usize = blocks.iter().map(|b| b.states()).sum();
    let cols = initial_conditions.len() * t_grid.len();
    let mut e = DMatrix::zeros(dim, cols);
    let mut y = DMatrix::zeros(1, cols);
    for (r, &n0) in initial_conditions.iter().enumerate() {
        let phi0 = KemBlock::eval_stack(blocks, n0);
        for (k, &t) in t_grid.iter().enumerate() {
            let col = KemBlock::evolve_stack(blocks, &phi0, t);
            let j = r * t_grid.len() + k;
            e.set_column(j, &col);
            y[(0, j)] = n_traj[(r, k)];
        }
    }
    let k = ridge_solve(&e, &y, alpha_c)?;
    let c = DVector::from_fn(dim, |i, _| k[(0, i)]);
    Ok(prune(c, &e))
}
