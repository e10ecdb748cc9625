//! Parameter-affine decomposition of the input dynamics
//! `grad Phi(N) g(N) ~ sum_k rho_k(N) G_k`, accelerating the observer
//! equations: the scheduling functions are scalar, the basis matrices
//! constant.

use super::kem::KoopmanModel;
use crate::error::{Error, Result};
use crate::numerics::{pso_minimize, ridge_solve, SwarmConfig};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Scheduling-function shape (a logistic curve; the first scheduling
/// function is the constant 1 and carries no shape).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RhoShape {
    pub eps: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LpvInputModel {
    /// Shapes of scheduling functions 2..m (the first is constant 1).
    pub shapes: Vec<RhoShape>,
    /// Basis matrices stacked as columns (n x m).
    pub g_tilde: DMatrix<f64>,
    /// Reconstruction error over the fit grid (Frobenius).
    pub fit_error: f64,
}

impl LpvInputModel {
    pub fn m(&self) -> usize {
        self.shapes.len() + 1
    }

    /// Scheduling vector rho(N).
    pub fn rho(&self, n: f64) -> DVector<f64> {
        let mut out = DVector::zeros(self.m());
        out[0] = 1.0;
        for (k, s) in self.shapes.iter().enumerate() {
            out[k + 1] = 1.0 / (1.0 + (-s.eps * (n - s.mu)).exp());
        }
        out
    }

    /// Reconstructed input map.
    pub fn eval(&self, n: f64) -> DVector<f64> {
        &self.g_tilde * self.rho(n)
    }

    /// Discrete-time input matrix `Lambda^-1 (e^{Lambda dt} - I) G(N)`.
    pub fn discrete_input(&self, model: &KoopmanModel, n: f64, dt: f64) -> Result<DVector<f64>> {
        let lam = model.lambda_matrix();
        let l = (lam.clone() * dt).exp();
        let eye = DMatrix::identity(lam.nrows(), lam.ncols());
        let inv = lam
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::invalid("discrete_input: singular spectrum matrix"))?;
        Ok(inv * (l - eye) * self.eval(n))
    }
}

fn rho_matrix(shapes: &[RhoShape], grid: &[f64]) -> DMatrix<f64> {
    let m = shapes.len() + 1;
    let mut rho = DMatrix::zeros(m, grid.len());
    for (j, &n) in grid.iter().enumerate() {
        rho[(0, j)] = 1.0;
        for (k, s) in shapes.iter().enumerate() {
            rho[(k + 1, j)] = 1.0 / (1.0 + (-s.eps * (n - s.mu)).exp());
        }
    }
    rho
}

/// Alternating fit: swarm search over the scheduling shapes with the
/// basis matrices solved in closed form (ridge) at each candidate.
pub fn lpv_decompose(
    model: &KoopmanModel,
    m: usize,
    grid: &[f64],
    swarm: &SwarmConfig,
    alpha_g: f64,
) -> Result<LpvInputModel> {
    if m < 1 {
        return Err(Error::invalid("lpv_decompose: m must be at least 1"));
    }
    if grid.len() < 2 * m {
        return Err(Error::invalid("lpv_decompose: grid too small for the requested order"));
    }
    let n_dim = model.dim();
    let mut g = DMatrix::zeros(n_dim, grid.len());
    for (j, &n) in grid.iter().enumerate() {
        g.set_column(j, &model.input_map(n));
    }

    let solve_for = |shapes: &[RhoShape]| -> Result<(DMatrix<f64>, f64)> {
        let rho = rho_matrix(shapes, grid);
        let g_tilde = ridge_solve(&rho, &g, alpha_g)?;
        let err = (&g - &g_tilde * rho).norm();
        Ok((g_tilde, err))
    };

    if m == 1 {
        let (g_tilde, err) = solve_for(&[])?;
        return Ok(LpvInputModel { shapes: vec![], g_tilde, fit_error: err });
    }

    let n_max = grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut bounds = Vec::with_capacity(2 * (m - 1));
    for _ in 0..m - 1 {
        bounds.push((0.5, 60.0));
        bounds.push((-0.2 * n_max, 1.2 * n_max));
    }
    let sw = SwarmConfig { bounds, ..swarm.clone() };
    let objective = |x: &[f64]| {
        let shapes: Vec<RhoShape> = x.chunks(2).map(|c| RhoShape { eps: c[0], mu: c[1] }).collect();
        match solve_for(&shapes) {
            Ok((_, err)) => err * err,
            Err(_) => 1e9,
        }
    };
    let (best, _) = pso_minimize(objective, &sw)?;
    let shapes: Vec<RhoShape> = best.chunks(2).map(|c| RhoShape { eps: c[0], mu: c[1] }).collect();
    let (g_tilde, err) = solve_for(&shapes)?;
    Ok(LpvInputModel { shapes, g_tilde, fit_error: err })
}
