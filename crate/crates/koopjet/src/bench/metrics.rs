//! Tracking metrics: weighted and unweighted integral of absolute error
//! and the maximum settling time of the full acceleration.

use super::runner::Trace;
use super::scenario::Scenario;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Metrics {
    /// Weighted IAE, RPM s.
    pub wiae_rpm_s: f64,
    /// Unweighted IAE, RPM s.
    pub iae_rpm_s: f64,
    /// Settling time of the last 0.5 -> 1 acceleration (last crossing of
    /// the +/- 1 percent band), s. Absent when the scenario has no full
    /// acceleration.
    pub mst_s: Option<f64>,
    /// Extreme relative excursions over the trace.
    pub peak_rel: f64,
    pub floor_rel: f64,
}

/// Trapezoidal error integrals in physical RPM units plus the settling
/// time of the full acceleration when present.
pub fn compute_metrics(trace: &Trace, scenario: &Scenario, nominal_rpm: f64) -> Result<Metrics> {
    if trace.t.len() < 2 {
        return Err(Error::invalid("metrics: trace too short"));
    }
    let dt = scenario.dt;
    let mut wiae = 0.0;
    let mut iae = 0.0;
    let mut peak = f64::NEG_INFINITY;
    let mut floor = f64::INFINITY;
    let n = trace.t.len();
    for k in 0..n {
        peak = peak.max(trace.n_rel[k]);
        floor = floor.min(trace.n_rel[k]);
        if k == 0 {
            continue;
        }
        let e0 = (trace.nd_rel[k - 1] - trace.n_rel[k - 1]).abs() * nominal_rpm;
        let e1 = (trace.nd_rel[k] - trace.n_rel[k]).abs() * nominal_rpm;
        let avg = 0.5 * (e0 + e1) * dt;
        wiae += scenario.w_e[k.min(scenario.w_e.len() - 1)] * avg;
        iae += avg;
    }

    // last full acceleration onset: command steps from <= 0.55 to >= 0.95
    let mut onset = None;
    for k in 1..n {
        if trace.nd_rel[k] >= 0.95 && trace.nd_rel[k - 1] <= 0.55 {
            onset = Some(k);
        }
    }
    let mst = onset.map(|k0| {
        let target = trace.nd_rel[n - 1];
        let band = 0.01 * target;
        let mut last_outside = k0;
        for k in k0..n {
            if (trace.n_rel[k] - target).abs() > band {
                last_outside = k;
            }
        }
        (last_outside - k0 + 1) as f64 * dt
    });
    Ok(Metrics {
        wiae_rpm_s: wiae,
        iae_rpm_s: iae,
        mst_s: mst,
        peak_rel: peak,
        floor_rel: floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::scenario::FlightPath;

    fn synthetic(nd: Vec<f64>, n: Vec<f64>, w: Vec<f64>) -> (Trace, Scenario) {
        let len = nd.len();
        let trace = Trace {
            t: (0..len).map(|k| k as f64 * 0.01).collect(),
            nd_rel: nd.clone(),
            n_rel: n,
            n_hat_rel: vec![None; len],
            v: vec![0.0; len],
            wf: vec![0.0; len],
            clamp: vec![false; len],
            failure: None,
        };
        let scenario = Scenario {
            name: "synthetic".into(),
            dt: 0.01,
            command: nd,
            w_e: w,
            flight: FlightPath::SeaLevelStatic,
            noise_sigma_rpm: 0.0,
            seed: 0,
        };
        (trace, scenario)
    }

    #[test]
    fn constant_error_rectangle() {
        // 1 RPM error (relative 1/14000) over 10 s, unit weight
        let len = 1001;
        let nd = vec![0.8; len];
        let n = vec![0.8 - 1.0 / 14_000.0; len];
        let (trace, sc) = synthetic(nd, n, vec![1.0; len]);
        let m = compute_metrics(&trace, &sc, 14_000.0).unwrap();
        assert!((m.iae_rpm_s - 10.0).abs() < 0.02, "IAE {}", m.iae_rpm_s);
        assert!((m.wiae_rpm_s - 10.0).abs() < 0.02);
    }

    #[test]
    fn zero_weight_window_excluded() {
        let len = 501;
        let nd = vec![0.8; len];
        let n = vec![0.79; len];
        let (trace, sc) = synthetic(nd, n, vec![0.0; len]);
        let m = compute_metrics(&trace, &sc, 14_000.0).unwrap();
        assert_eq!(m.wiae_rpm_s, 0.0);
        assert!(m.iae_rpm_s > 0.0);
    }

    #[test]
    fn settling_time_from_constructed_trace() {
        // step 0.5 -> 1.0 at t = 1.0; response enters the band for good
        // at t = 4.2 (last crossing 3.2 s after onset)
        let len = 1001;
        let mut nd = vec![0.5; len];
        let mut n = vec![0.5; len];
        for k in 100..len {
            nd[k] = 1.0;
            let t_since = (k - 100) as f64 * 0.01;
            n[k] = if t_since < 3.2 { 0.97 } else { 0.995 };
        }
        let (trace, sc) = synthetic(nd, n, vec![1.0; len]);
        let m = compute_metrics(&trace, &sc, 14_000.0).unwrap();
        let mst = m.mst_s.unwrap();
        assert!((mst - 3.2).abs() < 0.02, "MST {mst}");
    }

    #[test]
    fn perfect_tracking_zero_iae() {
        let len = 301;
        let nd = vec![0.7; len];
        let (trace, sc) = synthetic(nd.clone(), nd, vec![1.0; len]);
        let m = compute_metrics(&trace, &sc, 14_000.0).unwrap();
        assert_eq!(m.iae_rpm_s, 0.0);
        assert!(m.mst_s.is_none());
    }
}
