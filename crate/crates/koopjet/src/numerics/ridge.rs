//! Ridge-regularized least squares in normal-equation form.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Solve `min_K ||Y - K E||_F^2 + alpha ||K||_F^2` for the coefficient
/// matrix `K` (m x k), given the basis `E` (k x T) and targets `Y` (m x T):
/// `K^T = (E E^T + alpha I)^-1 E Y^T`.
pub fn ridge_solve(e: &DMatrix<f64>, y: &DMatrix<f64>, alpha: f64) -> Result<DMatrix<f64>> {
    if e.ncols() != y.ncols() {
        return Err(Error::invalid(format!(
            "ridge_solve: E has {} columns but Y has {}",
            e.ncols(),
            y.ncols()
        )));
    }
    if alpha < 0.0 {
        return Err(Error::invalid("ridge_solve: alpha must be >= 0"));
    }
    let k = e.nrows();
    let mut gram = e * e.transpose();
    for i in 0..k {
        gram[(i, i)] += alpha;
    }
    let rhs = e * y.transpose(); // k x m
    let solved = match gram.clone().cholesky() {
        Some(chol) => chol.solve(&rhs),
        None => {
            if alpha == 0.0 {
                return Err(Error::convergence(
                    "ridge_solve",
                    "singular normal equations with alpha = 0",
                ));
            }
            gram.lu().solve(&rhs).ok_or_else(|| {
                Error::convergence("ridge_solve", "normal equations not solvable")
            })?
        }
    };
    Ok(solved.transpose())
}
