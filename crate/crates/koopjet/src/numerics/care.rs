//! Continuous algebraic Riccati equation solver.
//!
//! Newton-Kleinman iteration: each step solves a Lyapunov equation for the
//! current stabilizing gain and refines it. The starting gain comes from a
//! shifted-Lyapunov construction when the open loop is unstable.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct CareProblem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
}

impl CareProblem {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, q: DMatrix<f64>, r: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || q.shape() != (n, n) || b.nrows() != n {
            return Err(Error::invalid("CareProblem: inconsistent matrix shapes"));
        }
        let m = b.ncols();
        if r.shape() != (m, m) {
            return Err(Error::invalid("CareProblem: R shape must match input count"));
        }
        if (&q - q.transpose()).amax() > 1e-9 * (1.0 + q.amax()) {
            return Err(Error::invalid("CareProblem: Q must be symmetric"));
        }
        if (&r - r.transpose()).amax() > 1e-9 * (1.0 + r.amax()) {
            return Err(Error::invalid("CareProblem: R must be symmetric"));
        }
        if r.clone().cholesky().is_none() {
            return Err(Error::invalid("CareProblem: R must be positive definite"));
        }
        Ok(CareProblem { a, b, q, r })
    }
}

/// Solve `A^T X + X A = -C` for `X` via the Kronecker-product linear system.
pub fn solve_lyapunov(a: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let at = a.transpose();
    // vec(A^T X) = (I (x) A^T) vec(X), vec(X A) = (A^T (x) I) vec(X)
    let m = eye.kronecker(&at) + at.kronecker(&eye);
    let rhs = DVector::from_fn(n * n, |i, _| -c[(i % n, i / n)]);
    let sol = match m.clone().lu().solve(&rhs) {
        Some(s) => s,
        None => {
            // exact zero pivot on a near-singular system: fall back to
            // the SVD least-squares solution
            let svd = m.svd(true, true);
            let cutoff = 1e-12 * svd.singular_values.max();
            svd.solve(&rhs, cutoff)
                .map_err(|e| Error::convergence("solve_lyapunov", e.to_string()))?
        }
    };
    let mut x = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            x[(i, j)] = sol[j * n + i];
        }
    }
    // symmetrize against round-off
    let xt = x.transpose();
    Ok((x + xt) * 0.5)
}

fn is_hurwitz_with_margin(a: &DMatrix<f64>, margin: f64) -> bool {
    a.clone()
        .complex_eigenvalues()
        .iter()
        .all(|l| l.re < -margin)
}

fn is_hurwitz(a: &DMatrix<f64>) -> bool {
    is_hurwitz_with_margin(a, 0.0)
}

/// Stabilizing initial gain: find `Z` from the eigenvalue-shifted Lyapunov
/// equation `(A + beta I) Z + Z (A + beta I)^T = 2 B B^T` and take
/// `K0 = B^T Z^-1`, which places the closed loop left of the shift.
fn stabilizing_gain(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    // the shift must clear the whole spectrum so A + beta I is
    // anti-stable and the Lyapunov solution is positive definite
    let spectral = a
        .clone()
        .complex_eigenvalues()
        .iter()
        .map(|l| l.re.abs())
        .fold(0.0, f64::max);
    let mut beta = spectral + 1.0;
    for _ in 0..6 {
        let shifted = a + DMatrix::<f64>::identity(n, n) * beta;
        // (A+bI) Z + Z (A+bI)^T = 2 B B^T, written as M^T Z + Z M = -C
        // with M = (A+bI)^T and C = -2 B B^T
        let m = shifted.transpose();
        let c = b * b.transpose() * -2.0;
        if let Ok(z) = solve_lyapunov(&m, &c) {
            // pseudo-inverse so stabilizable-but-nearly-uncontrollable
            // pairs yield a bounded gain: the weakly reachable directions
            // are stable and need no feedback, so they are truncated
            // rather than inverted
            for rel_cut in [1e-10, 1e-7, 1e-4] {
                let svd = z.clone().svd(true, true);
                let cutoff = rel_cut * svd.singular_values.max();
                if let Ok(z_pinv) = svd.pseudo_inverse(cutoff) {
                    let k0 = b.transpose() * z_pinv;
                    if k0.iter().all(|v| v.is_finite()) && is_hurwitz(&(a - b * &k0)) {
                        return Ok(k0);
                    }
                }
            }
        }
        beta *= 2.0;
    }
    Err(Error::convergence(
        "solve_care",
        "could not construct a stabilizing initial gain (pair may not be stabilizable)",
    ))
}

fn care_residual(p: &DMatrix<f64>, prob: &CareProblem, r_inv_bt: &DMatrix<f64>) -> DMatrix<f64> {
    prob.a.transpose() * p + p * &prob.a + &prob.q - p * &prob.b * r_inv_bt * p
}

/// Solve `A^T P + P A + Q - P B R^-1 B^T P = 0` for the stabilizing `P`.
///
/// Fails explicitly when no stabilizing solution is found; the returned
/// matrix satisfies the residual bound `||res|| <= 1e-8 (1 + ||P||)` and
/// `A - B R^-1 B^T P` is Hurwitz.
pub fn solve_care(prob: &CareProblem) -> Result<DMatrix<f64>> {
    let r_inv = prob
        .r
        .clone()
        .cholesky()
        .ok_or_else(|| Error::invalid("solve_care: R not positive definite"))?
        .inverse();
    let r_inv_bt = &r_inv * prob.b.transpose();

    // marginally stable eigenvalues (the tracking integrator computes as
    // ~ -1e-32) must take the stabilizing-gain path, otherwise the first
    // Lyapunov solve is singular
    let spectral = prob
        .a
        .clone()
        .complex_eigenvalues()
        .iter()
        .map(|l| l.norm())
        .fold(0.0, f64::max);
    let mut k = if is_hurwitz_with_margin(&prob.a, 1e-9 * (1.0 + spectral)) {
        DMatrix::zeros(prob.b.ncols(), prob.a.nrows())
    } else {
        stabilizing_gain(&prob.a, &prob.b)?
    };

    let mut p = DMatrix::zeros(prob.a.nrows(), prob.a.nrows());
    for _ in 0..60 {
        let a_cl = &prob.a - &prob.b * &k;
        let c = &prob.q + k.transpose() * &prob.r * &k;
        p = solve_lyapunov(&a_cl, &c)?;
        if !p.iter().all(|v| v.is_finite()) {
            return Err(Error::convergence(
                "solve_care",
                "iterate overflowed (pair close to uncontrollable)",
            ));
        }
        let k_next = &r_inv_bt * &p;
        let delta = (&k_next - &k).amax();
        k = k_next;
        let res = care_residual(&p, prob, &r_inv_bt).norm();
        if res <= 1e-10 * (1.0 + p.norm()) && delta < 1e-9 * (1.0 + k.amax()) {
            break;
        }
    }

    let res = care_residual(&p, prob, &r_inv_bt).norm();
    if res > 1e-8 * (1.0 + p.norm()) {
        return Err(Error::convergence(
            "solve_care",
            format!("residual {res:.3e} above tolerance"),
        ));
    }
    if !is_hurwitz(&(&prob.a - &prob.b * &r_inv_bt * &p)) {
        return Err(Error::convergence(
            "solve_care",
            "converged P is not stabilizing",
        ));
    }
    Ok(p)
}
