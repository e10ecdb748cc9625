//! Internal model controller derived from the identified governing
//! equation: the second-order internal model (engine lag times fuel lag)
//! inverted behind a double filter, executed in velocity form.

use crate::numerics::savitzky_golay_derivative;
use std::collections::VecDeque;

/// Equivalent PID gains of the velocity-form law for given local engine
/// gain/time constant: `Kp = (Te + Tf) / (Ke tau_f^2)`,
/// `Ki = 1 / (Ke tau_f^2)`, `Kd = Te Tf / (Ke tau_f^2)`.
pub fn imc_gains(k_e: f64, t_e: f64, t_f: f64, tau_f: f64) -> (f64, f64, f64) {
    let denom = k_e * tau_f * tau_f;
    ((t_e + t_f) / denom, 1.0 / denom, t_e * t_f / denom)
}

/// Velocity-form internal model controller:
/// `dv/dt = (Te Tf de' + (Te + Tf) e + int e) / (Ke tau_f^2) - 2 v / tau_f`.
///
/// The error derivative comes from a causal polynomial fit over a
/// trailing window, matching the measurement filter choice. Anti-windup
/// is the clamping scheme: while the limiter is active the error
/// integral freezes and the command state back-calculates to the applied
/// value.
#[derive(Debug, Clone)]
pub struct ImcController {
    pub tau_f: f64,
    /// First-order prefilter constant on the error input, s (0 disables).
    pub tau_meas: f64,
    v: f64,
    int_e: f64,
    e_filt: Option<f64>,
    history: VecDeque<f64>,
    window: usize,
    order: usize,
}

impl ImcController {
    pub fn new(tau_f: f64, window: usize, order: usize) -> ImcController {
        ImcController {
            tau_f,
            tau_meas: 0.0,
            v: 0.0,
            int_e: 0.0,
            e_filt: None,
            history: VecDeque::with_capacity(window),
            window,
            order,
        }
    }

    /// Start from an operating point so the command does not jump at
    /// engagement: the integral carries the value that makes the law
    /// stationary at zero error.
    pub fn reset_to(&mut self, v0: f64, k_e: f64) {
        self.v = v0;
        self.int_e = 2.0 * k_e * self.tau_f * v0;
        self.e_filt = None;
        self.history.clear();
    }

    /// One control period. `applied_prev` is the previous command after
    /// the limiter; when the limiter clamped, the command state
    /// back-calculates to it and the integral holds.
    pub fn step(
        &mut self,
        e_raw: f64,
        k_e: f64,
        t_e: f64,
        t_f: f64,
        dt: f64,
        clamped_prev: bool,
        applied_prev: Option<f64>,
    ) -> f64 {
        let e = if self.tau_meas > 0.0 {
            let prev = self.e_filt.unwrap_or(e_raw);
            let f = prev + dt / (self.tau_meas + dt) * (e_raw - prev);
            self.e_filt = Some(f);
            f
        } else {
            e_raw
        };
        if clamped_prev {
            // back-calculate the command state to the value the limiter
            // let through; the integral simply holds over the clamp
            if let Some(va) = applied_prev {
                self.v = va;
            }
        }
        if self.history.len() == self.window {
            self.history.pop_front();
        }
        self.history.push_back(e);
        let hist: Vec<f64> = self.history.iter().copied().collect();
        let de = if hist.len() >= 4 {
            savitzky_golay_derivative(&hist, self.order, dt)
        } else {
            0.0
        };
        if !clamped_prev {
            self.int_e += e * dt;
        }
        let v_dot = (t_e * t_f * de + (t_e + t_f) * e + self.int_e) / (k_e * self.tau_f * self.tau_f)
            - 2.0 * self.v / self.tau_f;
        self.v += v_dot * dt;
        self.v
    }
}
