//! The assembled Koopman eigenfunction model in real block form.

use super::eigfun::LfExpansion;
use super::lpv::LpvInputModel;
use crate::error::{Error, Result};
use crate::sindy::Term;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// One spectral block with its fitted eigenfunction components. Complex
/// pairs are carried as 2x2 rotation-scaling blocks so all downstream
/// linear algebra stays real.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KemBlock {
    Real {
        lambda: f64,
        phi: LfExpansion,
    },
    /// Repeated eigenvalue: state order [generalized, distinct], so the
    /// block matrix is [[l, 1], [0, l]].
    Repeated {
        lambda: f64,
        phi_gen: LfExpansion,
        phi_true: LfExpansion,
    },
    /// Conjugate pair: state order [real part, imaginary part] with
    /// block [[a, -b], [b, a]].
    Complex {
        alpha: f64,
        beta: f64,
        phi_re: LfExpansion,
        phi_im: LfExpansion,
    },
    /// Repeated conjugate pair with its generalized partners: state
    /// order [gen_re, gen_im, re, im].
    ComplexSecular {
        alpha: f64,
        beta: f64,
        phi_gen_re: LfExpansion,
        phi_gen_im: LfExpansion,
        phi_re: LfExpansion,
        phi_im: LfExpansion,
    },
}

impl KemBlock {
    pub fn states(&self) -> usize {
        match self {
            KemBlock::Real { .. } => 1,
            KemBlock::Repeated { .. } | KemBlock::Complex { .. } => 2,
            KemBlock::ComplexSecular { .. } => 4,
        }
    }

    fn expansions(&self) -> Vec<&LfExpansion> {
        match self {
            KemBlock::Real { phi, .. } => vec![phi],
            KemBlock::Repeated { phi_gen, phi_true, .. } => vec![phi_gen, phi_true],
            KemBlock::Complex { phi_re, phi_im, .. } => vec![phi_re, phi_im],
            KemBlock::ComplexSecular {
                phi_gen_re,
                phi_gen_im,
                phi_re,
                phi_im,
                ..
            } => vec![phi_gen_re, phi_gen_im, phi_re, phi_im],
        }
    }

    /// Stack eigenfunction values of all blocks at one point.
    pub fn eval_stack(blocks: &[KemBlock], n: f64) -> DVector<f64> {
        let dim: usize = blocks.iter().map(|b| b.states()).sum();
        let mut out = DVector::zeros(dim);
        let mut k = 0;
        for b in blocks {
            for e in b.expansions() {
                out[k] = e.eval(n);
                k += 1;
            }
        }
        out
    }

    /// Stack eigenfunction derivatives of all blocks at one point.
    pub fn eval_dx_stack(blocks: &[KemBlock], n: f64) -> DVector<f64> {
        let dim: usize = blocks.iter().map(|b| b.states()).sum();
        let mut out = DVector::zeros(dim);
        let mut k = 0;
        for b in blocks {
            for e in b.expansions() {
                out[k] = e.eval_dx(n);
                k += 1;
            }
        }
        out
    }

    /// Analytic free evolution of the stacked states by time `t`.
    pub fn evolve_stack(blocks: &[KemBlock], phi0: &DVector<f64>, t: f64) -> DVector<f64> {
        let mut out = phi0.clone();
        let mut k = 0;
        for b in blocks {
            match *b {
                KemBlock::Real { lambda, .. } => {
                    out[k] *= (lambda * t).exp();
                    k += 1;
                }
                KemBlock::Repeated { lambda, .. } => {
                    let e = (lambda * t).exp();
                    let (g0, d0) = (phi0[k], phi0[k + 1]);
                    out[k] = e * (g0 + t * d0);
                    out[k + 1] = e * d0;
                    k += 2;
                }
                KemBlock::Complex { alpha, beta, .. } => {
                    let e = (alpha * t).exp();
                    let (c, s) = ((beta * t).cos(), (beta * t).sin());
                    let (r0, i0) = (phi0[k], phi0[k + 1]);
                    out[k] = e * (r0 * c - i0 * s);
                    out[k + 1] = e * (r0 * s + i0 * c);
                    k += 2;
                }
                KemBlock::ComplexSecular { alpha, beta, .. } => {
                    let e = (alpha * t).exp();
                    let (c, s) = ((beta * t).cos(), (beta * t).sin());
                    let (gr, gi, r0, i0) = (phi0[k], phi0[k + 1], phi0[k + 2], phi0[k + 3]);
                    out[k] = e * ((gr + t * r0) * c - (gi + t * i0) * s);
                    out[k + 1] = e * ((gr + t * r0) * s + (gi + t * i0) * c);
                    out[k + 2] = e * (r0 * c - i0 * s);
                    out[k + 3] = e * (r0 * s + i0 * c);
                    k += 4;
                }
            }
        }
        out
    }
}

/// The Koopman eigenfunction model: block spectrum, eigenfunctions, mode
/// amplitudes, the exact input map carried from the governing equation,
/// and optionally its affine-LPV approximation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KoopmanModel {
    pub blocks: Vec<KemBlock>,
    /// Mode-amplitude row (reconstructs N from the states).
    pub c: DVector<f64>,
    /// Input-gain expansion `g(N)` of the governing equation.
    pub g_terms: Vec<Term>,
    pub lpv: Option<LpvInputModel>,
}

impl KoopmanModel {
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.states()).sum()
    }

    /// Block-diagonal spectrum matrix.
    pub fn lambda_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        let mut k = 0;
        for b in &self.blocks {
            match *b {
                KemBlock::Real { lambda, .. } => {
                    m[(k, k)] = lambda;
                    k += 1;
                }
                KemBlock::Repeated { lambda, .. } => {
                    m[(k, k)] = lambda;
                    m[(k, k + 1)] = 1.0;
                    m[(k + 1, k + 1)] = lambda;
                    k += 2;
                }
                KemBlock::Complex { alpha, beta, .. } => {
                    m[(k, k)] = alpha;
                    m[(k, k + 1)] = -beta;
                    m[(k + 1, k)] = beta;
                    m[(k + 1, k + 1)] = alpha;
                    k += 2;
                }
                KemBlock::ComplexSecular { alpha, beta, .. } => {
                    for off in [0, 2] {
                        m[(k + off, k + off)] = alpha;
                        m[(k + off, k + off + 1)] = -beta;
                        m[(k + off + 1, k + off)] = beta;
                        m[(k + off + 1, k + off + 1)] = alpha;
                    }
                    m[(k, k + 2)] = 1.0;
                    m[(k + 1, k + 3)] = 1.0;
                    k += 4;
                }
            }
        }
        m
    }

    pub fn phi(&self, n: f64) -> DVector<f64> {
        KemBlock::eval_stack(&self.blocks, n)
    }

    pub fn phi_dx(&self, n: f64) -> DVector<f64> {
        KemBlock::eval_dx_stack(&self.blocks, n)
    }

    /// Input gain of the governing equation.
    pub fn g_of_n(&self, n: f64) -> f64 {
        self.g_terms.iter().map(|t| t.eval(n)).sum()
    }

    /// Exact input map `grad Phi(N) g(N)`.
    pub fn input_map(&self, n: f64) -> DVector<f64> {
        self.phi_dx(n) * self.g_of_n(n)
    }

    /// Input map through the affine-LPV approximation when present.
    pub fn input_map_eval(&self, n: f64, use_lpv: bool) -> DVector<f64> {
        match (&self.lpv, use_lpv) {
            (Some(lpv), true) => lpv.eval(n),
            _ => self.input_map(n),
        }
    }

    /// Reconstructed spool speed from the eigenfunction states.
    pub fn output(&self, phi: &DVector<f64>) -> f64 {
        self.c.dot(phi)
    }

    /// State derivative: `Lambda Phi + grad Phi(n_hat) g(n_hat) w_f`.
    pub fn rhs(&self, phi: &DVector<f64>, n_hat: f64, w_f: f64, use_lpv: bool) -> DVector<f64> {
        let mut out = self.lambda_apply(phi);
        out += self.input_map_eval(n_hat, use_lpv) * w_f;
        out
    }

    /// Block-structured `Lambda * phi` without forming the matrix.
    pub fn lambda_apply(&self, phi: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(phi.len());
        let mut k = 0;
        for b in &self.blocks {
            match *b {
                KemBlock::Real { lambda, .. } => {
                    out[k] = lambda * phi[k];
                    k += 1;
                }
                KemBlock::Repeated { lambda, .. } => {
                    out[k] = lambda * phi[k] + phi[k + 1];
                    out[k + 1] = lambda * phi[k + 1];
                    k += 2;
                }
                KemBlock::Complex { alpha, beta, .. } => {
                    out[k] = alpha * phi[k] - beta * phi[k + 1];
                    out[k + 1] = beta * phi[k] + alpha * phi[k + 1];
                    k += 2;
                }
                KemBlock::ComplexSecular { alpha, beta, .. } => {
                    out[k] = alpha * phi[k] - beta * phi[k + 1] + phi[k + 2];
                    out[k + 1] = beta * phi[k] + alpha * phi[k + 1] + phi[k + 3];
                    out[k + 2] = alpha * phi[k + 2] - beta * phi[k + 3];
                    out[k + 3] = beta * phi[k + 2] + alpha * phi[k + 3];
                    k += 4;
                }
            }
        }
        out
    }

    /// Forced simulation driven by a zero-order-hold fuel series; returns
    /// the reconstructed spool-speed trajectory.
    pub fn simulate_forced(
        &self,
        n0: f64,
        wf: &[f64],
        dt: f64,
        use_lpv: bool,
    ) -> Result<Vec<f64>> {
        let mut phi = self.phi(n0);
        let mut out = Vec::with_capacity(wf.len() + 1);
        out.push(self.output(&phi));
        for &u in wf {
            let k1 = self.rhs(&phi, self.output(&phi), u, use_lpv);
            let p2 = &phi + &k1 * (dt / 2.0);
            let k2 = self.rhs(&p2, self.output(&p2), u, use_lpv);
            let p3 = &phi + &k2 * (dt / 2.0);
            let k3 = self.rhs(&p3, self.output(&p3), u, use_lpv);
            let p4 = &phi + &k3 * dt;
            let k4 = self.rhs(&p4, self.output(&p4), u, use_lpv);
            phi += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
            let n = self.output(&phi);
            if !n.is_finite() {
                return Err(Error::convergence("kem simulate", "trajectory diverged"));
            }
            out.push(n);
        }
        Ok(out)
    }

    /// Mean absolute error of the free (autonomous) reconstruction
    /// against reference trajectories.
    pub fn autonomous_mae(
        &self,
        initial_conditions: &[f64],
        t_grid: &[f64],
        reference: &DMatrix<f64>,
    ) -> f64 {
        let mut acc = 0.0;
        for (r, &n0) in initial_conditions.iter().enumerate() {
            let phi0 = self.phi(n0);
            for (k, &t) in t_grid.iter().enumerate() {
                let phi = KemBlock::evolve_stack(&self.blocks, &phi0, t);
                acc += (self.output(&phi) - reference[(r, k)]).abs();
            }
        }
        acc / (initial_conditions.len() * t_grid.len()) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sindy::LogisticTerm;

    fn linearish() -> LfExpansion {
        // 4 (LF(x; 1, 0.5) - LF(0; 1, 0.5)): vanishes at 0, nearly
        // linear over [0, 1]
        let lf0 = 1.0 / (1.0 + 0.5f64.exp());
        LfExpansion {
            terms: vec![
                LogisticTerm { xi: 4.0, eps: 1.0, mu: 0.5 },
                LogisticTerm { xi: -8.0 * lf0, eps: 0.0, mu: 0.0 },
            ],
        }
    }

    fn single_mode_model(lambda: f64) -> KoopmanModel {
        let phi = linearish();
        let scale = phi.eval(1.0);
        KoopmanModel {
            blocks: vec![KemBlock::Real { lambda, phi }],
            c: DVector::from_vec(vec![1.0 / scale]),
            g_terms: vec![Term::Constant { xi: 0.8 }],
            lpv: None,
        }
    }

    #[test]
    fn free_real_mode_decays_exponentially() {
        let m = single_mode_model(-2.0);
        let phi0 = m.phi(1.0);
        let phi_t = KemBlock::evolve_stack(&m.blocks, &phi0, 0.7);
        let expected = phi0[0] * (-1.4f64).exp();
        assert!((phi_t[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn complex_pair_oscillates_with_decay() {
        let m = KoopmanModel {
            blocks: vec![KemBlock::Complex {
                alpha: -0.5,
                beta: 3.0,
                phi_re: linearish(),
                phi_im: linearish(),
            }],
            c: DVector::from_vec(vec![1.0, 0.0]),
            g_terms: vec![Term::Constant { xi: 0.0 }],
            lpv: None,
        };
        let phi0 = DVector::from_vec(vec![1.0, 0.0]);
        let t = 1.2;
        let phi_t = KemBlock::evolve_stack(&m.blocks, &phi0, t);
        assert!((phi_t[0] - (-0.5 * t).exp() * (3.0 * t).cos()).abs() < 1e-12);
        assert!((phi_t[1] - (-0.5 * t).exp() * (3.0 * t).sin()).abs() < 1e-12);
        // matrix form agrees with the block evolution
        let lam = m.lambda_matrix();
        let num = (lam * t).exp() * phi0.clone();
        assert!((num - phi_t).norm() < 1e-9);
    }

    #[test]
    fn repeated_block_secular_growth() {
        let m = KoopmanModel {
            blocks: vec![KemBlock::Repeated {
                lambda: -1.0,
                phi_gen: linearish(),
                phi_true: linearish(),
            }],
            c: DVector::from_vec(vec![0.5, 0.5]),
            g_terms: vec![],
            lpv: None,
        };
        let phi0 = DVector::from_vec(vec![0.3, 0.7]);
        let t = 0.9;
        let phi_t = KemBlock::evolve_stack(&m.blocks, &phi0, t);
        let e = (-t).exp();
        assert!((phi_t[0] - e * (0.3 + t * 0.7)).abs() < 1e-12);
        assert!((phi_t[1] - e * 0.7).abs() < 1e-12);
    }

    #[test]
    fn forced_simulation_matches_induced_scalar_ode() {
        // a single real mode with output y = c phi induces the scalar
        // dynamics dy/dt = lambda y + c phi'(y) g(y) u; the state-space
        // simulation must integrate exactly that
        let m = single_mode_model(-1.0);
        let dt = 0.01;
        let steps = 800;
        let wf: Vec<f64> = (0..steps).map(|k| 0.4 + 0.3 * (0.02 * k as f64).sin()).collect();
        let kem_out = m.simulate_forced(0.5, &wf, dt, false).unwrap();
        let c = m.c[0];
        let phi = match &m.blocks[0] {
            KemBlock::Real { phi, .. } => phi.clone(),
            _ => unreachable!(),
        };
        let mut y = c * phi.eval(0.5);
        let mut max_err: f64 = 0.0;
        for (k, &u) in wf.iter().enumerate() {
            let f = |x: f64| -x + c * phi.eval_dx(x) * 0.8 * u;
            let k1 = f(y);
            let k2 = f(y + 0.5 * dt * k1);
            let k3 = f(y + 0.5 * dt * k2);
            let k4 = f(y + dt * k3);
            y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            max_err = max_err.max((kem_out[k + 1] - y).abs());
        }
        assert!(max_err < 1e-9, "max error {max_err}");
    }
}
