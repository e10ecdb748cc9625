//! Gain-scheduled PI design on the linearized governing equation.
//!
//! At each steady-state sample point the local loop (engine lag times
//! fuel lag) gets a PI tuned for a fast step response with no overshoot,
//! minimizing the integral of the squared tracking error plus a gain
//! regularization. The resulting gains are fitted by 5th-order
//! polynomials in the normalized spool speed.

use super::pi::PiGains;
use super::schedule::{polyfit, polyval};
use crate::error::{Error, Result};
use crate::sindy::SindyModel;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct LpvPiConfig {
    /// Steady-state design points over the normalized range.
    pub grid_points: usize,
    /// Fuel-system time constant, s.
    pub t_f: f64,
    /// Gain regularization weight.
    pub gain_reg: f64,
    /// Overshoot penalty weight (the zero-overshoot constraint).
    pub overshoot_penalty: f64,
    /// Plant-gain uncertainty factor for the robust overshoot check.
    pub gain_spread: f64,
    pub seed: u64,
}

impl Default for LpvPiConfig {
    fn default() -> Self {
        LpvPiConfig {
            grid_points: 11,
            t_f: 0.1,
            gain_reg: 1e-5,
            overshoot_penalty: 1e4,
            gain_spread: 1.25,
            seed: 2211,
        }
    }
}

/// Fitted polynomial schedules plus the raw design table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LpvPiSchedule {
    pub poly_kp: Vec<f64>,
    pub poly_ki: Vec<f64>,
    /// (N_i, Kp_i, Ki_i) design artifacts.
    pub table: Vec<(f64, f64, f64)>,
}

impl LpvPiSchedule {
    /// Corrected gains at a normalized operating point.
    pub fn gains(&self, n: f64) -> PiGains {
        PiGains {
            kp: polyval(&self.poly_kp, n).max(0.0),
            ki: polyval(&self.poly_ki, n).max(0.0),
        }
    }
}

/// Closed-loop unit-step response of a candidate PI on the local LTI
/// plant `K_e / ((T_e s + 1)(T_f s + 1))`: squared-error integral, peak
/// and terminal miss.
fn step_response(kp: f64, ki: f64, k_e: f64, t_e: f64, t_f: f64) -> (f64, f64, f64) {
    let dt = (t_e.min(t_f) / 20.0).min(0.01);
    let t_end = 10.0 * (t_e + t_f);
    let steps = (t_end / dt) as usize;
    let (mut x, mut wf, mut eta) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut ise = 0.0;
    let mut peak: f64 = 0.0;
    for _ in 0..steps {
        let e = 1.0 - x;
        let v = kp * e + ki * eta;
        let dx = (-x + k_e * wf) / t_e;
        let dwf = (v - wf) / t_f;
        x += dt * dx;
        wf += dt * dwf;
        eta += dt * e;
        if !x.is_finite() {
            return (1e9, 1e9, 1e9);
        }
        ise += dt * e * e;
        peak = peak.max(x);
    }
    (ise, (peak - 1.0).max(0.0), (1.0 - x).abs())
}

/// Design cost at a point: tracking cost at the nominal model, with the
/// zero-overshoot constraint also enforced under a plant-gain spread so
/// the schedule stays overshoot-free despite identification error.
fn step_cost(kp: f64, ki: f64, k_e: f64, t_e: f64, t_f: f64, cfg: &LpvPiConfig) -> f64 {
    let (ise, os, miss) = step_response(kp, ki, k_e, t_e, t_f);
    let (_, os_hot, _) = step_response(kp, ki, k_e * cfg.gain_spread, t_e / cfg.gain_spread, t_f);
    ise + cfg.overshoot_penalty * (os + os_hot)
        + 10.0 * miss
        + cfg.gain_reg * k_e * k_e * (kp * kp + ki * ki)
}

/// Design the schedule over evenly spaced steady points of the
/// identified model.
pub fn lpv_pi_design(model: &SindyModel, cfg: &LpvPiConfig) -> Result<LpvPiSchedule> {
    if cfg.grid_points < 7 {
        return Err(Error::invalid("lpv_pi_design: need at least 7 grid points"));
    }
    let mut table = Vec::with_capacity(cfg.grid_points);
    for i in 0..cfg.grid_points {
        let n = i as f64 / (cfg.grid_points - 1) as f64;
        let lin = model.linearize(n).map_err(|e| {
            Error::Infeasible(format!("lpv_pi_design: local loop unstable at N = {n}: {e}"))
        })?;
        let kp_hi = 30.0 / lin.k_e.max(1e-3);
        let ki_hi = 80.0 / lin.k_e.max(1e-3);
        // deterministic nested grid refinement: smooth in the operating
        // point, which keeps the polynomial fit well-behaved
        let mut center = (0.5 * kp_hi, 0.5 * ki_hi);
        let mut half = (0.5 * kp_hi, 0.5 * ki_hi);
        let mut best = (center.0, center.1, f64::INFINITY);
        for _stage in 0..4 {
            let side = 9;
            for a in 0..side {
                for b in 0..side {
                    let kp = (center.0 - half.0 + 2.0 * half.0 * a as f64 / (side - 1) as f64)
                        .clamp(0.0, kp_hi);
                    let ki = (center.1 - half.1 + 2.0 * half.1 * b as f64 / (side - 1) as f64)
                        .clamp(1e-3, ki_hi);
                    let cost = step_cost(kp, ki, lin.k_e, lin.t_e, cfg.t_f, cfg);
                    if cost < best.2 {
                        best = (kp, ki, cost);
                    }
                }
            }
            center = (best.0, best.1);
            half = (half.0 * 0.28, half.1 * 0.28);
        }
        table.push((n, best.0, best.1));
    }
    let ns: Vec<f64> = table.iter().map(|r| r.0).collect();
    let kps: Vec<f64> = table.iter().map(|r| r.1).collect();
    let kis: Vec<f64> = table.iter().map(|r| r.2).collect();
    let poly_kp = polyfit(&ns, &kps, 5)?;
    let poly_ki = polyfit(&ns, &kis, 5)?;
    let schedule = LpvPiSchedule { poly_kp, poly_ki, table };
    // evaluated gains must stay positive over the working range
    for i in 0..=20 {
        let n = i as f64 / 20.0;
        let g = schedule.gains(n);
        if g.kp < 0.0 || g.ki < 0.0 {
            return Err(Error::Infeasible(format!(
                "lpv_pi_design: fitted gains negative at N = {n}"
            )));
        }
    }
    Ok(schedule)
}
