//! Measurement simulation and data conditioning: corrected/normalized
//! quantities, excitation profiles, noise injection, filtering and
//! differentiation, plus dataset persistence.

mod io;
mod prep;
mod profiles;

pub use io::{read_dataset, write_dataset};
pub use prep::{add_noise, prepare_regression, RegressionPrep};
pub use profiles::{test_commands, training_commands, ProfileConfig};

use crate::plant::Ambient;
use serde::{Deserialize, Serialize};

/// Offsets and scales mapping corrected quantities onto the unit working
/// range: the offsets are the ground-idle corrected values.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalizationSpec {
    /// Spool-speed offset, RPM.
    pub o_n: f64,
    /// Spool-speed scale, RPM.
    pub s_n: f64,
    /// Fuel-flow offset, kg/s.
    pub o_w: f64,
    /// Fuel-flow scale, kg/s.
    pub s_w: f64,
}

impl Default for NormalizationSpec {
    fn default() -> Self {
        NormalizationSpec {
            o_n: 5000.0,
            s_n: 10_000.0,
            o_w: 0.04,
            s_w: 0.8,
        }
    }
}

impl NormalizationSpec {
    pub fn normalize_n(&self, n_corr: f64) -> f64 {
        (n_corr - self.o_n) / self.s_n
    }

    pub fn denormalize_n(&self, n: f64) -> f64 {
        n * self.s_n + self.o_n
    }

    pub fn normalize_w(&self, wf_corr: f64) -> f64 {
        (wf_corr - self.o_w) / self.s_w
    }

    pub fn denormalize_w(&self, w: f64) -> f64 {
        w * self.s_w + self.o_w
    }
}

/// Corrected quantities collapse flight-condition variation:
/// `N_corr = N sqrt(288/T1t)`, `Wf_corr = Wf sqrt(288/T1t) (101325/p1t)`.
pub fn correct(n_phys: f64, wf_phys: f64, amb: &Ambient) -> (f64, f64) {
    let theta = amb.theta_factor();
    let delta = amb.delta_factor();
    (n_phys * theta, wf_phys * theta * delta)
}

/// Inverse of [`correct`].
pub fn uncorrect(n_corr: f64, wf_corr: f64, amb: &Ambient) -> (f64, f64) {
    let theta = amb.theta_factor();
    let delta = amb.delta_factor();
    (n_corr / theta, wf_corr / (theta * delta))
}

/// Processing provenance stored alongside every dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Lineage {
    pub noise_sigma_rpm: f64,
    pub seed: u64,
    pub filter_window: usize,
    pub filter_order: usize,
    pub normalization: NormalizationSpec,
}

/// Uniformly sampled identification dataset. The derivative channel is
/// produced from the filtered channel only.
#[derive(Debug, Clone)]
pub struct Dataset {
    /// Time grid, s (uniform).
    pub t: Vec<f64>,
    /// Noisy corrected spool speed, RPM.
    pub n_raw: Vec<f64>,
    /// Filtered corrected spool speed, RPM.
    pub n_filt: Vec<f64>,
    /// Normalized filtered spool speed.
    pub n_norm: Vec<f64>,
    /// Normalized corrected delivered fuel flow.
    pub wf_norm: Vec<f64>,
    /// Time derivative of the normalized spool speed, 1/s.
    pub dn_dt: Vec<f64>,
    /// Excitation segment id per sample.
    pub segment: Vec<u8>,
    pub lineage: Lineage,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn dt(&self) -> f64 {
        if self.t.len() < 2 {
            0.0
        } else {
            self.t[1] - self.t[0]
        }
    }

    /// Slice a contiguous time window `[t0, t1)` out of the dataset.
    pub fn window(&self, t0: f64, t1: f64) -> Dataset {
        let lo = self.t.partition_point(|t| *t < t0);
        let hi = self.t.partition_point(|t| *t < t1);
        Dataset {
            t: self.t[lo..hi].to_vec(),
            n_raw: self.n_raw[lo..hi].to_vec(),
            n_filt: self.n_filt[lo..hi].to_vec(),
            n_norm: self.n_norm[lo..hi].to_vec(),
            wf_norm: self.wf_norm[lo..hi].to_vec(),
            dn_dt: self.dn_dt[lo..hi].to_vec(),
            segment: self.segment[lo..hi].to_vec(),
            lineage: self.lineage.clone(),
        }
    }

    /// Complement of [`window`]: everything outside `[t0, t1)`.
    pub fn without_window(&self, t0: f64, t1: f64) -> Dataset {
        let lo = self.t.partition_point(|t| *t < t0);
        let hi = self.t.partition_point(|t| *t < t1);
        let keep: Vec<usize> = (0..lo).chain(hi..self.t.len()).collect();
        let pick = |v: &[f64]| keep.iter().map(|&i| v[i]).collect::<Vec<f64>>();
        Dataset {
            t: pick(&self.t),
            n_raw: pick(&self.n_raw),
            n_filt: pick(&self.n_filt),
            n_norm: pick(&self.n_norm),
            wf_norm: pick(&self.wf_norm),
            dn_dt: pick(&self.dn_dt),
            segment: keep.iter().map(|&i| self.segment[i]).collect(),
            lineage: self.lineage.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::isa_inlet;

    #[test]
    fn correct_identity_at_reference() {
        let amb = Ambient {
            h: 0.0,
            m0: 0.0,
            p0: 101_325.0,
            t0: 288.0,
            p1t: 101_325.0,
            t1t: 288.0,
        };
        let (n, w) = correct(12_000.0, 0.2, &amb);
        assert!((n - 12_000.0).abs() < 1e-9);
        assert!((w - 0.2).abs() < 1e-12);
    }

    #[test]
    fn correct_square_root_factor() {
        let amb = Ambient {
            h: 0.0,
            m0: 0.0,
            p0: 101_325.0,
            t0: 288.0,
            p1t: 101_325.0,
            t1t: 288.0 * 1.21,
        };
        let (n, _) = correct(11_000.0, 0.2, &amb);
        assert!((n - 11_000.0 / 1.1).abs() < 1e-9);
    }

    #[test]
    fn correct_linear_in_pressure() {
        let amb = Ambient {
            h: 0.0,
            m0: 0.0,
            p0: 101_325.0,
            t0: 288.0,
            p1t: 101_325.0 / 2.0,
            t1t: 288.0,
        };
        let (_, w) = correct(11_000.0, 0.2, &amb);
        assert!((w - 0.4).abs() < 1e-12);
    }

    #[test]
    fn round_trips_are_identities() {
        let amb = isa_inlet(4000.0, 0.4).unwrap();
        let spec = NormalizationSpec::default();
        let (nc, wc) = correct(13_000.0, 0.25, &amb);
        let (np, wp) = uncorrect(nc, wc, &amb);
        assert!((np - 13_000.0).abs() < 1e-12 * 13_000.0);
        assert!((wp - 0.25).abs() < 1e-12);
        let n = spec.normalize_n(nc);
        assert!((spec.denormalize_n(n) - nc).abs() < 1e-12 * nc.abs().max(1.0));
        let w = spec.normalize_w(wc);
        assert!((spec.denormalize_w(w) - wc).abs() < 1e-12);
    }

    #[test]
    fn paper_normalization_anchors() {
        let spec = NormalizationSpec::default();
        assert_eq!(spec.normalize_n(5000.0), 0.0);
        assert_eq!(spec.normalize_n(15_000.0), 1.0);
        assert_eq!(spec.normalize_w(0.04), 0.0);
    }
}
