//! Benchmark scenarios: the canonical 70-second stair profile with its
//! error-weight windows, the varying-flight sweep, and the abrupt
//! disturbance case.

use serde::{Deserialize, Serialize};

/// Flight-condition path over the scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum FlightPath {
    SeaLevelStatic,
    /// Sampled altitude/Mach series on the scenario grid.
    Series { h: Vec<f64>, m0: Vec<f64> },
}

/// One closed-loop evaluation case. Commands are relative spool speed
/// (physical speed over the 14000 RPM nominal).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub dt: f64,
    pub command: Vec<f64>,
    /// Error-weight schedule aligned with the command grid.
    pub w_e: Vec<f64>,
    pub flight: FlightPath,
    pub noise_sigma_rpm: f64,
    pub seed: u64,
}

impl Scenario {
    pub fn len(&self) -> usize {
        self.command.len()
    }

    pub fn is_empty(&self) -> bool {
        self.command.is_empty()
    }

    pub fn duration(&self) -> f64 {
        (self.command.len().saturating_sub(1)) as f64 * self.dt
    }

    pub fn flight_at(&self, k: usize) -> (f64, f64) {
        match &self.flight {
            FlightPath::SeaLevelStatic => (0.0, 0.0),
            FlightPath::Series { h, m0 } => (h[k.min(h.len() - 1)], m0[k.min(m0.len() - 1)]),
        }
    }
}

/// Error weight per the optimization windows: 5 over the small-transient
/// phase, 0 over the settle and full-deceleration windows, 1 over the
/// final full acceleration.
fn weight_at(t: f64) -> f64 {
    if (5.0..50.0).contains(&t) {
        5.0
    } else if t < 5.0 || (50.0..55.0).contains(&t) {
        0.0
    } else {
        1.0
    }
}

/// The 70 s stair profile: small transients over [5, 50), full
/// deceleration to 0.5 at 50 s, full acceleration to 1 at 55 s.
pub fn canonical_profile(dt: f64) -> Scenario {
    let steps = (70.0 / dt).round() as usize;
    let mut command = Vec::with_capacity(steps + 1);
    let mut w_e = Vec::with_capacity(steps + 1);
    // stair levels of the small-transient window (configuration, not
    // reference data)
    let stairs: [(f64, f64); 8] = [
        (0.0, 0.5),
        (5.0, 0.65),
        (12.5, 0.8),
        (20.0, 0.9),
        (27.5, 1.0),
        (35.0, 0.9),
        (42.5, 0.65),
        (50.0, 0.5),
    ];
    for k in 0..=steps {
        let t = k as f64 * dt;
        let level = if t >= 55.0 {
            1.0
        } else {
            stairs
                .iter()
                .rev()
                .find(|(start, _)| t >= *start)
                .map(|(_, v)| *v)
                .unwrap_or(0.5)
        };
        command.push(level);
        w_e.push(weight_at(t));
    }
    Scenario {
        name: "sea-level".into(),
        dt,
        command,
        w_e,
        flight: FlightPath::SeaLevelStatic,
        noise_sigma_rpm: 50.0,
        seed: 7001,
    }
}

/// The canonical tracking profile under smooth altitude/Mach sweeps
/// (triangular over the 70 s window).
pub fn varying_flight_scenario(dt: f64) -> Scenario {
    let base = canonical_profile(dt);
    let steps = base.command.len();
    let mut h = Vec::with_capacity(steps);
    let mut m0 = Vec::with_capacity(steps);
    for k in 0..steps {
        let t = k as f64 * dt;
        let frac = (t / 70.0).clamp(0.0, 1.0);
        let tri = 1.0 - (2.0 * frac - 1.0).abs();
        h.push(9000.0 * tri);
        m0.push(0.7 * tri);
    }
    Scenario {
        name: "varying-flight".into(),
        flight: FlightPath::Series { h, m0 },
        ..base
    }
}

/// Constant 90 percent setpoint with abrupt flight-condition steps:
/// altitude up 3000 m at 10 s, Mach up 0.4 at 40 s.
pub fn disturbance_scenario(dt: f64) -> Scenario {
    let steps = (70.0 / dt).round() as usize;
    let mut h = Vec::with_capacity(steps + 1);
    let mut m0 = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = k as f64 * dt;
        h.push(if t >= 10.0 { 5000.0 } else { 0.0 });
        m0.push(if t >= 40.0 { 0.5 } else { 0.0 });
    }
    Scenario {
        name: "disturbance".into(),
        dt,
        command: vec![0.9; steps + 1],
        w_e: vec![1.0; steps + 1],
        flight: FlightPath::Series { h, m0 },
        noise_sigma_rpm: 50.0,
        seed: 7003,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_windows() {
        assert_eq!(weight_at(20.0), 5.0);
        assert_eq!(weight_at(52.0), 0.0);
        assert_eq!(weight_at(60.0), 1.0);
        assert_eq!(weight_at(2.0), 0.0);
    }

    #[test]
    fn canonical_envelope_and_accel() {
        let s = canonical_profile(0.01);
        assert_eq!(s.len(), 7001);
        assert!(s.command.iter().all(|c| (0.5..=1.0).contains(c)));
        // full deceleration window then full acceleration
        let at = |t: f64| s.command[(t / 0.01) as usize];
        assert_eq!(at(52.0), 0.5);
        assert_eq!(at(56.0), 1.0);
        assert_eq!(at(69.9), 1.0);
        // the maximum command is reached inside the stair window too
        assert_eq!(at(30.0), 1.0);
    }

    #[test]
    fn disturbance_setpoint_and_steps() {
        let s = disturbance_scenario(0.01);
        assert!(s.command.iter().all(|c| (*c - 0.9).abs() < 1e-12));
        let (h, m) = s.flight_at(500);
        assert_eq!(h, 0.0);
        assert_eq!(m, 0.0);
        let (h, m) = s.flight_at(1500);
        assert_eq!(h, 5000.0);
        assert_eq!(m, 0.0);
        let (_, m) = s.flight_at(4500);
        assert_eq!(m, 0.5);
    }

    #[test]
    fn varying_flight_inside_envelope() {
        let s = varying_flight_scenario(0.01);
        if let FlightPath::Series { h, m0 } = &s.flight {
            assert!(h.iter().all(|v| (0.0..=11_000.0).contains(v)));
            assert!(m0.iter().all(|v| (0.0..1.0).contains(v)));
            // peaks mid-window
            assert!(h[3500] > 8900.0);
        } else {
            panic!("expected series flight path");
        }
    }
}
