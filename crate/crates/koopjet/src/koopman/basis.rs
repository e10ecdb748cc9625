//! Exponential temporal bases and the projection objectives.
//!
//! Real spectra switch to repeated eigenvalues with secular terms when
//! two entries come closer than the merge tolerance; complex spectra
//! merge low-frequency pairs into single real eigenvalues, exclude
//! excessively oscillatory modes, and generate complex secular rows for
//! near-coincident pairs.

use crate::error::{Error, Result};
use crate::numerics::ridge_solve;
use nalgebra::DMatrix;

/// One retained spectral block and the rows it contributes to the basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeBlock {
    /// `e^{lambda t}` (1 row).
    Real { lambda: f64 },
    /// `e^{lambda t}` and `(1 + t) e^{lambda t}` (2 rows).
    RepeatedReal { lambda: f64 },
    /// `e^{alpha t} cos(beta t)` and `e^{alpha t} sin(beta t)` (2 rows).
    Complex { alpha: f64, beta: f64 },
    /// Repeated complex pair: the plain rotating pair plus its
    /// `t`-multiplied secular partners (4 rows).
    ComplexSecular { alpha: f64, beta: f64 },
}

impl ModeBlock {
    pub fn rows(&self) -> usize {
        match self {
            ModeBlock::Real { .. } => 1,
            ModeBlock::RepeatedReal { .. } | ModeBlock::Complex { .. } => 2,
            ModeBlock::ComplexSecular { .. } => 4,
        }
    }

    /// State dimension contributed to the assembled model.
    pub fn states(&self) -> usize {
        self.rows()
    }
}

/// Merge tolerance defaults shared by the objectives.
pub const MERGE_TOL: f64 = 0.05;
pub const BETA_MERGE: f64 = 0.05;
pub const RATIO_MAX: f64 = 2.5;

/// Sort descending and replace any too-close consecutive pair by a
/// repeated eigenvalue at the pair mean.
pub fn merge_real(lambdas: &[f64], tol: f64) -> Vec<ModeBlock> {
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        if i + 1 < sorted.len() && (sorted[i] - sorted[i + 1]).abs() < tol {
            out.push(ModeBlock::RepeatedReal {
                lambda: 0.5 * (sorted[i] + sorted[i + 1]),
            });
            i += 2;
        } else {
            out.push(ModeBlock::Real { lambda: sorted[i] });
            i += 1;
        }
    }
    out
}

/// Complex-pair resolution: merge small-imaginary pairs to real
/// eigenvalues, exclude pairs beyond the oscillation ratio, and collapse
/// near-coincident pairs (complex-plane distance) into secular blocks.
pub fn merge_complex(
    pairs: &[(f64, f64)],
    beta_merge: f64,
    ratio_max: f64,
    dist_tol: f64,
) -> Vec<ModeBlock> {
    let mut kept: Vec<(f64, f64)> = Vec::new();
    let mut out = Vec::new();
    for &(alpha, beta) in pairs {
        let beta = beta.abs();
        if beta < beta_merge {
            out.push(ModeBlock::Real { lambda: alpha });
        } else if (beta / alpha).abs() > ratio_max {
            // excessively oscillatory: excluded from the basis
        } else {
            kept.push((alpha, beta));
        }
    }
    // upper-triangular distance scan over the surviving complex pairs
    let mut used = vec![false; kept.len()];
    for i in 0..kept.len() {
        if used[i] {
            continue;
        }
        let mut partner = None;
        for j in i + 1..kept.len() {
            if used[j] {
                continue;
            }
            let d = ((kept[i].0 - kept[j].0).powi(2) + (kept[i].1 - kept[j].1).powi(2)).sqrt();
            if d < dist_tol {
                partner = Some(j);
                break;
            }
        }
        match partner {
            Some(j) => {
                used[i] = true;
                used[j] = true;
                out.push(ModeBlock::ComplexSecular {
                    alpha: 0.5 * (kept[i].0 + kept[j].0),
                    beta: 0.5 * (kept[i].1 + kept[j].1),
                });
            }
            None => {
                used[i] = true;
                out.push(ModeBlock::Complex {
                    alpha: kept[i].0,
                    beta: kept[i].1,
                });
            }
        }
    }
    out
}

/// Stack the temporal basis rows of the retained blocks on a uniform
/// time grid.
pub fn exp_basis(blocks: &[ModeBlock], t_grid: &[f64]) -> Result<DMatrix<f64>> {
    if blocks.is_empty() {
        return Err(Error::invalid("exp_basis: no retained modes"));
    }
    let rows: usize = blocks.iter().map(|b| b.rows()).sum();
    let mut e = DMatrix::zeros(rows, t_grid.len());
    let mut r = 0;
    for b in blocks {
        match *b {
            ModeBlock::Real { lambda } => {
                for (k, &t) in t_grid.iter().enumerate() {
                    e[(r, k)] = (lambda * t).exp();
                }
                r += 1;
            }
            ModeBlock::RepeatedReal { lambda } => {
                for (k, &t) in t_grid.iter().enumerate() {
                    let base = (lambda * t).exp();
                    e[(r, k)] = base;
                    e[(r + 1, k)] = (1.0 + t) * base;
                }
                r += 2;
            }
            ModeBlock::Complex { alpha, beta } => {
                for (k, &t) in t_grid.iter().enumerate() {
                    let base = (alpha * t).exp();
                    e[(r, k)] = base * (beta * t).cos();
                    e[(r + 1, k)] = base * (beta * t).sin();
                }
                r += 2;
            }
            ModeBlock::ComplexSecular { alpha, beta } => {
                for (k, &t) in t_grid.iter().enumerate() {
                    let base = (alpha * t).exp();
                    let c = (beta * t).cos();
                    let s = (beta * t).sin();
                    e[(r, k)] = base * c;
                    e[(r + 1, k)] = base * s;
                    e[(r + 2, k)] = t * base * c;
                    e[(r + 3, k)] = t * base * s;
                }
                r += 4;
            }
        }
    }
    Ok(e)
}

/// Ridge projection of the trajectories onto the basis and the residual
/// objective `||N - K E||_F^2`.
pub fn projection_objective(
    blocks: &[ModeBlock],
    n_traj: &DMatrix<f64>,
    t_grid: &[f64],
    alpha_k: f64,
) -> Result<(f64, DMatrix<f64>)> {
    let e = exp_basis(blocks, t_grid)?;
    let k = ridge_solve(&e, n_traj, alpha_k)?;
    let resid = n_traj - &k * &e;
    Ok((resid.norm_squared(), k))
}

/// Objective for a candidate real spectrum.
pub fn eig_objective_real(
    lambdas: &[f64],
    n_traj: &DMatrix<f64>,
    t_grid: &[f64],
    tol: f64,
    alpha_k: f64,
) -> f64 {
    let blocks = merge_real(lambdas, tol);
    match projection_objective(&blocks, n_traj, t_grid, alpha_k) {
        Ok((j, _)) => j,
        Err(_) => 1e6,
    }
}

/// Objective for a candidate complex spectrum (conjugate pairs given by
/// their upper-half representatives).
pub fn eig_objective_complex(
    pairs: &[(f64, f64)],
    n_traj: &DMatrix<f64>,
    t_grid: &[f64],
    alpha_k: f64,
) -> f64 {
    let blocks = merge_complex(pairs, BETA_MERGE, RATIO_MAX, MERGE_TOL);
    if blocks.is_empty() {
        return 1e6;
    }
    match projection_objective(&blocks, n_traj, t_grid, alpha_k) {
        Ok((j, _)) => j,
        Err(_) => 1e6,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, dt: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * dt).collect()
    }

    #[test]
    fn single_real_at_t_zero() {
        let e = exp_basis(&[ModeBlock::Real { lambda: -1.0 }], &[0.0]).unwrap();
        assert_eq!(e.shape(), (1, 1));
        assert_eq!(e[(0, 0)], 1.0);
    }

    #[test]
    fn repeated_pair_secular_row() {
        let t = grid(100, 0.01);
        let e = exp_basis(&[ModeBlock::RepeatedReal { lambda: -2.0 }], &t).unwrap();
        // second row value 1 at t=0, slope lambda + 1
        assert_eq!(e[(1, 0)], 1.0);
        let slope = (e[(1, 1)] - e[(1, 0)]) / 0.01;
        assert!((slope - (-2.0 + 1.0)).abs() < 0.02, "slope {slope}");
    }

    #[test]
    fn complex_rows_at_t_zero_and_harmonic_identity() {
        let t = grid(500, 0.01);
        let e = exp_basis(&[ModeBlock::Complex { alpha: -1.0, beta: 2.0 }], &t).unwrap();
        assert_eq!(e[(0, 0)], 1.0);
        assert_eq!(e[(1, 0)], 0.0);
        for k in 0..t.len() {
            let sum = e[(0, k)].powi(2) + e[(1, k)].powi(2);
            let expect = (-2.0 * t[k]).exp();
            assert!((sum - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn merge_real_mean_rule() {
        let blocks = merge_real(&[-1.0, -1.05, -3.0], 0.1);
        assert_eq!(blocks.len(), 2);
        match blocks[0] {
            ModeBlock::RepeatedReal { lambda } => assert!((lambda + 1.025).abs() < 1e-12),
            _ => panic!("expected repeated block"),
        }
        assert_eq!(blocks[1], ModeBlock::Real { lambda: -3.0 });
    }

    #[test]
    fn complex_merges_and_exclusions() {
        // small beta -> real; high ratio -> excluded; coincident -> secular
        let blocks = merge_complex(
            &[(-1.0, 0.01), (-1.0, 3.0), (-2.0, 1.0), (-2.01, 1.01)],
            0.05,
            2.5,
            0.05,
        );
        assert_eq!(blocks.len(), 2);
        assert!(matches!(blocks[0], ModeBlock::Real { .. }));
        assert!(matches!(blocks[1], ModeBlock::ComplexSecular { .. }));
    }

    #[test]
    fn exact_membership_real() {
        let t = grid(1000, 0.01);
        let traj = DMatrix::from_fn(1, t.len(), |_, k| (-2.0 * t[k]).exp());
        let j = eig_objective_real(&[-2.0], &traj, &t, 0.05, 1e-10);
        assert!(j <= 1e-10, "objective {j}");
        let (_, k) = projection_objective(&[ModeBlock::Real { lambda: -2.0 }], &traj, &t, 1e-10).unwrap();
        assert!((k[(0, 0)] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn exact_membership_complex() {
        let t = grid(1500, 0.01);
        let traj = DMatrix::from_fn(1, t.len(), |_, k| (-t[k]).exp() * (2.0 * t[k]).cos());
        let j = eig_objective_complex(&[(-1.0, 2.0)], &traj, &t, 1e-10);
        assert!(j <= 1e-10, "objective {j}");
    }

    #[test]
    fn complex_reduces_to_real_when_beta_zero() {
        let t = grid(800, 0.01);
        let traj = DMatrix::from_fn(2, t.len(), |r, k| ((r as f64 + 1.0) * -1.5 * t[k]).exp());
        let jr = eig_objective_real(&[-1.5, -3.0], &traj, &t, 0.05, 1e-8);
        let jc = eig_objective_complex(&[(-1.5, 0.0), (-3.0, 0.0)], &traj, &t, 1e-8);
        assert!((jr - jc).abs() <= 1e-10 * (1.0 + jr.abs()), "jr={jr} jc={jc}");
    }

    #[test]
    fn high_ratio_mode_excluded() {
        let t = grid(800, 0.01);
        let traj = DMatrix::from_fn(1, t.len(), |_, k| (-t[k]).exp() * (3.0 * t[k]).cos());
        // ratio 3 > 2.5: the only mode is excluded so the objective is
        // the penalty value
        let j = eig_objective_complex(&[(-1.0, 3.0)], &traj, &t, 1e-8);
        assert_eq!(j, 1e6);
    }

    #[test]
    fn adding_modes_never_hurts() {
        let t = grid(1000, 0.01);
        let traj = DMatrix::from_fn(1, t.len(), |_, k| {
            (-0.8 * t[k]).exp() - 0.4 * (-2.5 * t[k]).exp()
        });
        let j1 = eig_objective_real(&[-0.8], &traj, &t, 0.2, 1e-12);
        let j2 = eig_objective_real(&[-0.8, -2.5], &traj, &t, 0.2, 1e-12);
        assert!(j2 <= j1 + 1e-12, "j1={j1} j2={j2}");
    }
}
