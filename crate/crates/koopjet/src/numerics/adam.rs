//! Gradient descent with adaptive momentum.

use crate::error::{Error, Result};
use nalgebra::DVector;

/// Running state of the optimizer. The moment vectors have the same shape
/// as the parameter vector; `k` counts steps starting at 1.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub v: DVector<f64>,
    pub s: DVector<f64>,
    pub k: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eta_p: f64,
    pub eps: f64,
}

impl AdamState {
    /// Fresh state with zero moments and the usual momentum constants.
    pub fn new(dim: usize, eta_p: f64) -> Self {
        AdamState {
            v: DVector::zeros(dim),
            s: DVector::zeros(dim),
            k: 1,
            beta1: 0.9,
            beta2: 0.999,
            eta_p,
            eps: 1e-8,
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    /// Step size at iteration `k`: the baseline rate scaled by the
    /// momentum-correction ratio (1 - beta2^k) / (1 - beta1^k).
    pub fn alpha(&self) -> f64 {
        self.eta_p * (1.0 - self.beta2.powi(self.k as i32)) / (1.0 - self.beta1.powi(self.k as i32))
    }
}

/// One descent step. The moments are updated first, then the parameters
/// move by `alpha_k * v / sqrt(s + eps)` (the stabilizer sits inside the
/// square root).
pub fn adam_step(
    params: &DVector<f64>,
    grad: &DVector<f64>,
    state: &AdamState,
) -> Result<(DVector<f64>, AdamState)> {
    if grad.len() != params.len() {
        return Err(Error::invalid(format!(
            "gradient length {} does not match parameter length {}",
            grad.len(),
            params.len()
        )));
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::invalid("non-finite gradient passed to adam_step"));
    }

    let mut next = state.clone();
    next.v = state.v.scale(state.beta1) + grad.scale(1.0 - state.beta1);
    next.s = state.s.scale(state.beta2) + grad.component_mul(grad).scale(1.0 - state.beta2);

    let alpha = next.alpha();
    let mut out = params.clone();
    for i in 0..out.len() {
        let denom = (next.s[i] + state.eps).sqrt();
        if denom > 0.0 {
            out[i] -= alpha * next.v[i] / denom;
        }
    }
    next.k += 1;
    Ok((out, next))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_decays_first_moment() {
        let params = DVector::from_vec(vec![1.0, -2.0, 3.5]);
        let grad = DVector::zeros(3);
        let mut state = AdamState::new(3, 0.1);
        state.v = DVector::from_vec(vec![0.5, 0.5, 0.5]);
        state.s = DVector::from_vec(vec![0.25, 0.25, 0.25]);
        let (_, next) = adam_step(&params, &grad, &state).unwrap();
        for i in 0..3 {
            assert!((next.v[i] - 0.45).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_gradient_zero_moments_is_identity() {
        let params = DVector::from_vec(vec![1.0, -2.0, 3.5]);
        let grad = DVector::zeros(3);
        let state = AdamState::new(3, 0.1);
        let (out, _) = adam_step(&params, &grad, &state).unwrap();
        assert_eq!(out, params);
    }

    #[test]
    fn zero_moments_zero_grad_is_identity() {
        let params = DVector::from_vec(vec![0.3]);
        let grad = DVector::zeros(1);
        let state = AdamState::new(1, 1.0).with_eps(0.0);
        let (out, _) = adam_step(&params, &grad, &state).unwrap();
        assert_eq!(out[0], 0.3);
    }

    #[test]
    fn hand_evaluated_single_step() {
        // k=1, unit gradient, zero moments, eps = 0, eta_p = 1:
        // v = 0.1, s = 0.001, alpha_1 = (1-0.999)/(1-0.9) = 0.01,
        // step = 0.01 * 0.1 / sqrt(0.001) = 0.0316227766...
        let params = DVector::from_vec(vec![0.0]);
        let grad = DVector::from_vec(vec![1.0]);
        let state = AdamState::new(1, 1.0).with_eps(0.0);
        let (out, next) = adam_step(&params, &grad, &state).unwrap();
        let expected = 0.01 * 0.1 / 0.001f64.sqrt();
        assert!((out[0] - (-expected)).abs() < 1e-12);
        assert!((expected - 0.03162277660168379).abs() < 1e-12);
        assert!((next.v[0] - 0.1).abs() < 1e-15);
        assert!((next.s[0] - 0.001).abs() < 1e-15);
        assert_eq!(next.k, 2);
    }

    #[test]
    fn two_steps_constant_gradient_moments() {
        let params = DVector::from_vec(vec![0.0]);
        let grad = DVector::from_vec(vec![1.0]);
        let state = AdamState::new(1, 1.0).with_eps(0.0);
        let (p1, s1) = adam_step(&params, &grad, &state).unwrap();
        let (_, s2) = adam_step(&p1, &grad, &s1).unwrap();
        assert!((s2.v[0] - 0.19).abs() < 1e-15);
        assert!((s2.s[0] - 0.001999).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_finite_gradient() {
        let params = DVector::from_vec(vec![0.0]);
        let grad = DVector::from_vec(vec![f64::NAN]);
        let state = AdamState::new(1, 1.0);
        assert!(adam_step(&params, &grad, &state).is_err());
    }
}
