//! Koopman spectral identification of the estimated autonomous dynamics:
//! eigenvalue optimization by temporal projection, eigenfunction
//! regression from the Koopman PDE, mode-amplitude projection, assembly
//! of the eigenfunction model, and the affine-LPV input decomposition.

mod basis;
mod eigfun;
mod eigvals;
mod kem;
mod lpv;
mod modes;
mod sampling;
mod thrust;

pub use basis::{eig_objective_complex, eig_objective_real, exp_basis, merge_complex, merge_real, ModeBlock};
pub use eigfun::{fit_eigenfunction, EigFitConfig, EigenfunctionFit, FitTarget, LfExpansion};
pub use eigvals::{optimize_eigenvalues, EigOptConfig, SpectrumMode};
pub use kem::{KemBlock, KoopmanModel};
pub use lpv::{lpv_decompose, LpvInputModel};
pub use modes::{fit_modes_spatial, fit_modes_temporal};
pub use sampling::{nonlinear_sampling, SamplingKind};
pub use thrust::{fit_thrust_output, ThrustOutput};

use serde::{Deserialize, Serialize};

/// Multiplicity resolution of one optimized eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MultiplicityTag {
    Distinct,
    RepeatedSecular,
    MergedOut,
}

/// One eigenvalue `alpha +/- i beta` (beta = 0 for real entries).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EigEntry {
    pub alpha: f64,
    pub beta: f64,
    pub tag: MultiplicityTag,
}

/// The optimized spectrum together with its projection quality.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenvalueSet {
    pub entries: Vec<EigEntry>,
    /// Projection objective at the optimum.
    pub objective: f64,
    /// Mean absolute reconstruction error of the trajectories.
    pub mae: f64,
}

impl EigenvalueSet {
    /// Retained mode blocks (excluded entries dropped, merges applied).
    pub fn blocks(&self) -> Vec<ModeBlock> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < self.entries.len() {
            let e = self.entries[i];
            match e.tag {
                MultiplicityTag::MergedOut => i += 1,
                MultiplicityTag::RepeatedSecular => {
                    // repeated entries come in consecutive pairs with the
                    // same value
                    if e.beta == 0.0 {
                        out.push(ModeBlock::RepeatedReal { lambda: e.alpha });
                    } else {
                        out.push(ModeBlock::ComplexSecular { alpha: e.alpha, beta: e.beta });
                    }
                    i += 2;
                }
                MultiplicityTag::Distinct => {
                    if e.beta == 0.0 {
                        out.push(ModeBlock::Real { lambda: e.alpha });
                    } else {
                        out.push(ModeBlock::Complex { alpha: e.alpha, beta: e.beta });
                    }
                    i += 1;
                }
            }
        }
        out
    }
}
