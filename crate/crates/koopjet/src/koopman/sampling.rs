//! Nonlinear sampling of the autonomous function with density rising
//! toward the origin, where the dissipative dynamics flatten out.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingKind {
    /// `N_j = N_max (e^{c u} - 1) / (e^c - 1)`; larger `c` packs more
    /// samples near zero.
    Exponential,
    /// `N_j = N_max u^p` with `p >= 1`.
    Power,
}

/// Strictly increasing samples in `(0, n_max]`; the first sample is
/// never exactly zero. A degenerate parameter (`c -> 0` or `p = 1`)
/// recovers uniform spacing.
pub fn nonlinear_sampling(
    count: usize,
    kind: SamplingKind,
    param: f64,
    n_max: f64,
) -> Result<Vec<f64>> {
    if count < 2 {
        return Err(Error::invalid("nonlinear_sampling: need at least 2 samples"));
    }
    if n_max <= 0.0 {
        return Err(Error::invalid("nonlinear_sampling: n_max must be positive"));
    }
    let out: Vec<f64> = (1..=count)
        .map(|j| {
            let u = j as f64 / count as f64;
            match kind {
                SamplingKind::Exponential => {
                    if param.abs() < 1e-9 {
                        n_max * u
                    } else {
                        n_max * ((param * u).exp() - 1.0) / (param.exp() - 1.0)
                    }
                }
                SamplingKind::Power => n_max * u.powf(param.max(1.0)),
            }
        })
        .collect();
    Ok(out)
}
