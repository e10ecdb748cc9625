//! Thrust output projection onto the eigenfunction states and the fuel
//! flow.

use super::kem::KoopmanModel;
use crate::error::{Error, Result};
use crate::numerics::ridge_solve;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// `F ~ C_F Phi + D_F Wf` on normalized corrected thrust.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThrustOutput {
    pub c_f: DVector<f64>,
    pub d_f: f64,
}

impl ThrustOutput {
    pub fn predict(&self, phi: &DVector<f64>, w_f: f64) -> f64 {
        self.c_f.dot(phi) + self.d_f * w_f
    }
}

/// Least-squares projection of the normalized corrected thrust channel
/// onto `[Phi(N(t)); Wf(t)]`.
pub fn fit_thrust_output(
    model: &KoopmanModel,
    n_norm: &[f64],
    wf_norm: &[f64],
    thrust_cn: &[f64],
) -> Result<ThrustOutput> {
    let t_len = n_norm.len();
    if t_len == 0 || wf_norm.len() != t_len || thrust_cn.len() != t_len {
        return Err(Error::invalid("fit_thrust_output: channel lengths differ"));
    }
    let n_dim = model.dim();
    let mut e = DMatrix::zeros(n_dim + 1, t_len);
    for (j, &n) in n_norm.iter().enumerate() {
        let phi = model.phi(n);
        for i in 0..n_dim {
            e[(i, j)] = phi[i];
        }
        e[(n_dim, j)] = wf_norm[j];
    }
    let y = DMatrix::from_fn(1, t_len, |_, j| thrust_cn[j]);
    let k = ridge_solve(&e, &y, 1e-9)?;
    Ok(ThrustOutput {
        c_f: DVector::from_fn(n_dim, |i, _| k[(0, i)]),
        d_f: k[(0, n_dim)],
    })
}
