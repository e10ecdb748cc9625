//! Closed-loop execution of a designed controller against the
//! component-level plant.

use super::scenario::Scenario;
use crate::control::{
    CubicSpline, ImcController, LqgiController, LqgiDesign, PiController, PiGains, LpvPiSchedule,
};
use crate::datakit::{add_noise, correct, NormalizationSpec};
use crate::error::Result;
use crate::koopman::KoopmanModel;
use crate::plant::{isa_inlet, Plant};
use crate::sindy::SindyModel;

/// Designed-controller bundle for the tournament.
#[derive(Debug, Clone)]
pub struct ControllerSet {
    pub pi: PiGains,
    pub lpv_pi: LpvPiSchedule,
    pub imc_tau_f: f64,
    /// Trailing-window length and polynomial order of the IMC error
    /// derivative.
    pub imc_deriv_window: usize,
    pub imc_deriv_order: usize,
    /// Measurement prefilter constant for the internal model controller.
    pub imc_tau_meas: f64,
    pub sindy: SindyModel,
    pub kem: KoopmanModel,
    pub klqgi: LqgiDesign,
    pub norm: NormalizationSpec,
    pub t_f: f64,
}

/// Runtime governor executing one of the four control laws in
/// normalized corrected coordinates (the plain PI deliberately uses the
/// fixed standard-day conversion).
pub enum Governor {
    Pi(PiController),
    LpvPi {
        sched: LpvPiSchedule,
        pi: PiController,
    },
    Imc {
        ctrl: ImcController,
        ke: CubicSpline,
        te: CubicSpline,
        t_f: f64,
    },
    Klqgi(LqgiController),
}

impl Governor {
    pub fn name(&self) -> &'static str {
        match self {
            Governor::Pi(_) => "pi",
            Governor::LpvPi { .. } => "lpv-pi",
            Governor::Imc { .. } => "imc",
            Governor::Klqgi(_) => "klqgi",
        }
    }
}

/// Build a governor from the design bundle. IMC gain/time-constant
/// schedules are tabulated from the identified model once.
pub fn make_governor(set: &ControllerSet, kind: &str, dt: f64) -> Result<Governor> {
    match kind {
        "pi" => Ok(Governor::Pi(PiController::new(set.pi))),
        "lpv-pi" => Ok(Governor::LpvPi {
            sched: set.lpv_pi.clone(),
            pi: PiController::new(set.lpv_pi.gains(0.5)),
        }),
        "imc" => {
            let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
            let mut kes = Vec::with_capacity(grid.len());
            let mut tes = Vec::with_capacity(grid.len());
            for &n in &grid {
                let lin = set.sindy.linearize(n)?;
                kes.push(lin.k_e);
                tes.push(lin.t_e);
            }
            // short trailing window: the half-second measurement filter
            // would add more delay than the target closed-loop period
            let mut ctrl = ImcController::new(set.imc_tau_f, set.imc_deriv_window, set.imc_deriv_order);
            ctrl.tau_meas = set.imc_tau_meas;
            Ok(Governor::Imc {
                ctrl,
                ke: CubicSpline::new(grid.clone(), kes)?,
                te: CubicSpline::new(grid, tes)?,
                t_f: set.t_f,
            })
        }
        "klqgi" => Ok(Governor::Klqgi(LqgiController::new(
            set.klqgi.clone(),
            set.kem.clone(),
            dt,
        ))),
        other => Err(crate::error::Error::invalid(format!(
            "unknown controller kind '{other}'"
        ))),
    }
}

/// Closed-loop trace at the control rate.
#[derive(Debug, Clone)]
pub struct Trace {
    pub t: Vec<f64>,
    pub nd_rel: Vec<f64>,
    pub n_rel: Vec<f64>,
    /// Observer estimate (relative), present for the Koopman controller.
    pub n_hat_rel: Vec<Option<f64>>,
    /// Fuel command after the controller, before the limiter, kg/s.
    pub v: Vec<f64>,
    pub wf: Vec<f64>,
    pub clamp: Vec<bool>,
    pub failure: Option<String>,
}

/// Run one scenario. The controller reads the (optionally noisy)
/// physical spool speed; corrected/normalized conversions happen at the
/// boundary using the measured inlet conditions.
pub fn run_tracking(
    plant: &Plant,
    set: &ControllerSet,
    kind: &str,
    scenario: &Scenario,
) -> Result<Trace> {
    let dt = scenario.dt;
    let nominal = plant.design.n_dp;
    let mut gov = make_governor(set, kind, dt)?;
    let (h0, m00) = scenario.flight_at(0);
    let amb0 = isa_inlet(h0, m00)?;
    let n_phys0 = scenario.command[0] * nominal;
    let mut state = plant.steady_state(n_phys0, &amb0)?;

    // measurement noise series (empty when sigma = 0)
    let noise = if scenario.noise_sigma_rpm > 0.0 {
        add_noise(
            &vec![0.0; scenario.len()],
            scenario.noise_sigma_rpm,
            scenario.seed,
        )
    } else {
        vec![0.0; scenario.len()]
    };

    // initialize the governor at the steady point
    let norm = &set.norm;
    {
        let (n_corr0, wf_corr0) = correct(state.n_rpm, state.w_f, &amb0);
        let n0 = norm.normalize_n(n_corr0);
        let v0 = norm.normalize_w(wf_corr0);
        match &mut gov {
            Governor::Pi(pi) => pi.preset_output(v0),
            Governor::LpvPi { pi, sched } => {
                pi.gains = sched.gains(n0);
                pi.preset_output(v0);
            }
            Governor::Imc { ctrl, ke, .. } => {
                let k_e = ke.eval(n0).max(1e-3);
                ctrl.reset_to(v0, k_e);
            }
            Governor::Klqgi(ctrl) => ctrl.reset_to(n0, v0),
        }
    }

    let mut trace = Trace {
        t: Vec::with_capacity(scenario.len()),
        nd_rel: Vec::with_capacity(scenario.len()),
        n_rel: Vec::with_capacity(scenario.len()),
        n_hat_rel: Vec::with_capacity(scenario.len()),
        v: Vec::with_capacity(scenario.len()),
        wf: Vec::with_capacity(scenario.len()),
        clamp: Vec::with_capacity(scenario.len()),
        failure: None,
    };
    let mut clamped_prev = false;
    let mut applied_prev_norm: Option<f64> = None;

    for k in 0..scenario.len() {
        let t = k as f64 * dt;
        let (h, m0) = scenario.flight_at(k);
        let amb = match isa_inlet(h, m0) {
            Ok(a) => a,
            Err(e) => {
                trace.failure = Some(format!("ambient at t={t:.2}: {e}"));
                break;
            }
        };
        let nd_rel = scenario.command[k];
        let n_meas_phys = state.n_rpm + noise[k];
        let theta = amb.theta_factor();
        let n_d_norm = norm.normalize_n(nd_rel * nominal * theta);
        let (n_corr_meas, _) = correct(n_meas_phys, 0.0, &amb);
        let n_norm_meas = norm.normalize_n(n_corr_meas);

        // control law in its own coordinates -> physical fuel command
        let (v_phys, n_hat_rel) = match &mut gov {
            Governor::Pi(pi) => {
                // classical governor: relative-speed error, fixed
                // standard-day fuel conversion, no flight correction
                let e = nd_rel - n_meas_phys / nominal;
                let v_norm = pi.step(e, dt, clamped_prev);
                (norm.denormalize_w(v_norm), None)
            }
            Governor::LpvPi { sched, pi } => {
                // the loop runs in corrected coordinates, which already
                // collapse the flight variation the online gain
                // correction would otherwise compensate
                pi.gains = sched.gains(n_norm_meas);
                let e = n_d_norm - n_norm_meas;
                let v_norm = pi.step(e, dt, clamped_prev);
                let wf_corr = norm.denormalize_w(v_norm);
                (wf_corr / (theta * amb.delta_factor()), None)
            }
            Governor::Imc { ctrl, ke, te, t_f } => {
                let e = n_d_norm - n_norm_meas;
                let v_norm = ctrl.step(
                    e,
                    ke.eval(n_norm_meas).max(1e-3),
                    te.eval(n_norm_meas).max(1e-3),
                    *t_f,
                    dt,
                    clamped_prev,
                    applied_prev_norm,
                );
                let wf_corr = norm.denormalize_w(v_norm);
                (wf_corr / (theta * amb.delta_factor()), None)
            }
            Governor::Klqgi(ctrl) => {
                let v_norm = ctrl.step(n_norm_meas, n_d_norm, dt, clamped_prev, applied_prev_norm);
                let (_, n_hat) = ctrl.estimate();
                let n_hat_rel = norm.denormalize_n(n_hat) / theta / nominal;
                let wf_corr = norm.denormalize_w(v_norm);
                (wf_corr / (theta * amb.delta_factor()), Some(n_hat_rel))
            }
        };

        match plant.clm_step(&state, v_phys, &amb, dt) {
            Ok((next, out)) => {
                trace.t.push(t);
                trace.nd_rel.push(nd_rel);
                trace.n_rel.push(state.n_rpm / nominal);
                trace.n_hat_rel.push(n_hat_rel);
                trace.v.push(v_phys);
                trace.wf.push(state.w_f);
                trace.clamp.push(out.clamped);
                clamped_prev = out.clamped;
                let (_, applied_corr) = correct(0.0, out.v_applied, &amb);
                applied_prev_norm = Some(norm.normalize_w(applied_corr));
                state = next;
            }
            Err(e) => {
                trace.failure = Some(format!("plant at t={t:.2}: {e}"));
                break;
            }
        }
    }
    Ok(trace)
}
