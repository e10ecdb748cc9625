//! Noise injection and the filter/normalize/differentiate pipeline.

use super::{Dataset, Lineage, NormalizationSpec};
use crate::error::{Error, Result};
use crate::numerics::{central_diff, savitzky_golay};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Additive seeded Gaussian white noise.
pub fn add_noise(series: &[f64], sigma: f64, seed: u64) -> Vec<f64> {
    if sigma == 0.0 {
        return series.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    series
        .iter()
        .map(|v| {
            let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.random();
            v + sigma * (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        })
        .collect()
}

/// Filter, normalization and differentiation settings.
#[derive(Debug, Clone)]
pub struct RegressionPrep {
    pub filter_window: usize,
    pub filter_order: usize,
    pub normalization: NormalizationSpec,
}

impl Default for RegressionPrep {
    fn default() -> Self {
        RegressionPrep {
            filter_window: 51,
            filter_order: 3,
            normalization: NormalizationSpec::default(),
        }
    }
}

impl RegressionPrep {
    /// Assemble a regression-ready dataset from raw corrected channels:
    /// filter the spool speed, normalize, then differentiate, in that
    /// order.
    pub fn prepare(
        &self,
        t: Vec<f64>,
        n_raw_corr: Vec<f64>,
        wf_corr: Vec<f64>,
        segment: Vec<u8>,
        noise_sigma_rpm: f64,
        seed: u64,
    ) -> Result<Dataset> {
        if t.len() < 3 {
            return Err(Error::invalid("prepare_regression: series too short"));
        }
        if t.len() != n_raw_corr.len() || t.len() != wf_corr.len() || t.len() != segment.len() {
            return Err(Error::invalid("prepare_regression: channel lengths differ"));
        }
        let dt = t[1] - t[0];
        let n_filt = savitzky_golay(&n_raw_corr, self.filter_window, self.filter_order)?;
        let n_norm: Vec<f64> = n_filt.iter().map(|v| self.normalization.normalize_n(*v)).collect();
        let wf_norm: Vec<f64> = wf_corr.iter().map(|v| self.normalization.normalize_w(*v)).collect();
        let dn_dt = central_diff(&n_norm, dt)?;
        Ok(Dataset {
            t,
            n_raw: n_raw_corr,
            n_filt,
            n_norm,
            wf_norm,
            dn_dt,
            segment,
            lineage: Lineage {
                noise_sigma_rpm,
                seed,
                filter_window: self.filter_window,
                filter_order: self.filter_order,
                normalization: self.normalization,
            },
        })
    }
}

/// One-call helper used by the pipeline.
pub fn prepare_regression(
    t: Vec<f64>,
    n_raw_corr: Vec<f64>,
    wf_corr: Vec<f64>,
    segment: Vec<u8>,
    noise_sigma_rpm: f64,
    seed: u64,
) -> Result<Dataset> {
    RegressionPrep::default().prepare(t, n_raw_corr, wf_corr, segment, noise_sigma_rpm, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sigma_is_identity() {
        let s = vec![1.0, 2.0, 3.0];
        assert_eq!(add_noise(&s, 0.0, 1), s);
    }

    #[test]
    fn noise_std_matches_sigma() {
        let base = vec![0.0; 100_000];
        let noisy = add_noise(&base, 50.0, 9);
        let mean = noisy.iter().sum::<f64>() / noisy.len() as f64;
        let std = (noisy.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / noisy.len() as f64).sqrt();
        assert!((49.0..=51.0).contains(&std), "sample std {std}");
    }

    #[test]
    fn same_seed_identical() {
        let base = vec![1.0; 100];
        assert_eq!(add_noise(&base, 50.0, 4), add_noise(&base, 50.0, 4));
    }

    #[test]
    fn linear_ramp_has_constant_derivative() {
        let dt = 0.01;
        let n = 2000;
        let t: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
        let n_raw: Vec<f64> = t.iter().map(|t| 6000.0 + 100.0 * t).collect();
        let wf = vec![0.1; n];
        let seg = vec![1u8; n];
        let ds = prepare_regression(t, n_raw, wf, seg, 0.0, 0).unwrap();
        // d(normalized)/dt = 100 / 10000 = 0.01
        for v in &ds.dn_dt[30..n - 30] {
            assert!((v - 0.01).abs() < 1e-6, "derivative {v}");
        }
    }

    #[test]
    fn steady_segment_derivative_near_zero() {
        let dt = 0.01;
        let n = 20_000;
        let t: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
        let n_raw = add_noise(&vec![9000.0; n], 50.0, 17);
        let wf = vec![0.1; n];
        let seg = vec![1u8; n];
        let ds = prepare_regression(t, n_raw, wf, seg, 50.0, 17).unwrap();
        let mean = ds.dn_dt.iter().sum::<f64>() / ds.dn_dt.len() as f64;
        assert!(mean.abs() < 1e-4, "steady derivative mean {mean}");
    }

    #[test]
    fn lineage_records_settings() {
        let t: Vec<f64> = (0..200).map(|i| i as f64 * 0.01).collect();
        let ds = prepare_regression(t, vec![8000.0; 200], vec![0.1; 200], vec![1; 200], 50.0, 23)
            .unwrap();
        assert_eq!(ds.lineage.filter_window, 51);
        assert_eq!(ds.lineage.filter_order, 3);
        assert_eq!(ds.lineage.seed, 23);
        assert_eq!(ds.lineage.noise_sigma_rpm, 50.0);
    }

    fn passband_rel_rms(sigma: f64, seed: u64) -> f64 {
        let dt = 0.01;
        let n = 20_000;
        let f = 0.1;
        let t: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
        let clean: Vec<f64> = t
            .iter()
            .map(|t| 10_000.0 + 2000.0 * (std::f64::consts::TAU * f * t).sin())
            .collect();
        let meas = add_noise(&clean, sigma, seed);
        let ds = prepare_regression(t.clone(), meas, vec![0.1; n], vec![1; n], sigma, seed).unwrap();
        let margin = 200;
        let mut err2 = 0.0;
        let mut ref2 = 0.0;
        for i in margin..n - margin {
            let truth = 0.2 * std::f64::consts::TAU * f * (std::f64::consts::TAU * f * t[i]).cos();
            err2 += (ds.dn_dt[i] - truth).powi(2);
            ref2 += truth * truth;
        }
        (err2 / ref2).sqrt()
    }

    #[test]
    fn sine_derivative_passband_distortion() {
        // 0.1 Hz pure sine: filtering plus differencing must not distort
        // the derivative beyond 2 percent relative RMS
        let rel = passband_rel_rms(0.0, 0);
        assert!(rel <= 0.02, "relative RMS {rel}");
    }

    #[test]
    fn sine_derivative_noise_floor() {
        // with 50 RPM sensor noise the derivative stays usable for
        // regression (zero-mean noise, bounded spread)
        let rel = passband_rel_rms(50.0, 31);
        assert!(rel <= 0.25, "relative RMS {rel}");
    }
}
