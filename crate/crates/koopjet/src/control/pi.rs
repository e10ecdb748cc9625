//! Classical proportional-integral governor with clamping anti-windup.

use crate::plant::Ambient;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PiGains {
    pub kp: f64,
    pub ki: f64,
}

/// PI controller state; the integral freezes while the downstream
/// limiter reports clamping.
#[derive(Debug, Clone)]
pub struct PiController {
    pub gains: PiGains,
    integral: f64,
}

impl PiController {
    pub fn new(gains: PiGains) -> PiController {
        PiController { gains, integral: 0.0 }
    }

    pub fn reset(&mut self) {
        self.integral = 0.0;
    }

    /// Load the integral so the command starts at `v0` with zero error
    /// (bumpless engagement at a steady point).
    pub fn preset_output(&mut self, v0: f64) {
        self.integral = v0 / self.gains.ki.max(1e-9);
    }

    pub fn step(&mut self, e: f64, dt: f64, antiwindup: bool) -> f64 {
        if !antiwindup {
            self.integral += e * dt;
        }
        self.gains.kp * e + self.gains.ki * self.integral
    }
}

/// Flight-condition correction of design-point (corrected) gains:
/// `Kp = Kp_corr (101325/p1t)`, `Ki = Ki_corr sqrt(288/T1t) (p1t/101325)`.
pub fn flight_gain_correction(corrected: PiGains, amb: &Ambient) -> PiGains {
    let delta = amb.delta_factor();
    let theta = amb.theta_factor();
    PiGains {
        kp: corrected.kp * delta,
        ki: corrected.ki * theta / delta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::isa_inlet;

    #[test]
    fn integral_only_when_error_zero() {
        let mut pi = PiController::new(PiGains { kp: 1.0, ki: 3.0 });
        for _ in 0..100 {
            pi.step(0.1, 0.01, false);
        }
        let v = pi.step(0.0, 0.01, false);
        assert!((v - 3.0 * 0.1).abs() < 1e-9, "v = {v}");
    }

    #[test]
    fn hand_integrated_response() {
        // Kp=1, Ki=3, constant e=0.1 for one second from zero state:
        // v = 0.1 + 3 * 0.1 = 0.4
        let mut pi = PiController::new(PiGains { kp: 1.0, ki: 3.0 });
        let mut v = 0.0;
        for _ in 0..100 {
            v = pi.step(0.1, 0.01, false);
        }
        assert!((v - 0.4).abs() < 1e-12, "v = {v}");
    }

    #[test]
    fn clamped_interval_freezes_integral() {
        let mut pi = PiController::new(PiGains { kp: 1.0, ki: 3.0 });
        for _ in 0..50 {
            pi.step(0.1, 0.01, false);
        }
        let before = pi.integral;
        for _ in 0..50 {
            pi.step(0.5, 0.01, true);
        }
        assert_eq!(pi.integral, before);
    }

    #[test]
    fn flight_correction_factors() {
        let sls = Ambient {
            h: 0.0, m0: 0.0, p0: 101_325.0, t0: 288.0, p1t: 101_325.0, t1t: 288.0,
        };
        let g = flight_gain_correction(PiGains { kp: 2.0, ki: 4.0 }, &sls);
        assert!((g.kp - 2.0).abs() < 1e-12);
        assert!((g.ki - 4.0).abs() < 1e-12);

        // doubled inlet pressure halves Kp
        let dense = Ambient { p1t: 2.0 * 101_325.0, ..sls };
        let g = flight_gain_correction(PiGains { kp: 2.0, ki: 4.0 }, &dense);
        assert!((g.kp - 1.0).abs() < 1e-12);
        assert!((g.ki - 8.0).abs() < 1e-12);

        // quadrupled temperature halves the Ki theta factor
        let hot = Ambient { t1t: 288.0 * 4.0, ..sls };
        let g = flight_gain_correction(PiGains { kp: 2.0, ki: 4.0 }, &hot);
        assert!((g.ki - 4.0 * 0.5).abs() < 1e-12);

        // a real flight point applies both factors
        let amb = isa_inlet(5000.0, 0.3).unwrap();
        let g = flight_gain_correction(PiGains { kp: 1.0, ki: 1.0 }, &amb);
        assert!((g.kp - amb.delta_factor()).abs() < 1e-12);
    }
}
