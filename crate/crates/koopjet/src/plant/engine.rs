//! Gas-path cycle evaluation, Newton-Raphson matching and the transient
//! step of the component-level model.

use super::ambient::{Ambient, P_STD, T_REF};
use super::limiter::LimiterTables;
use super::maps::{self, SurrogateMaps};
use super::{DesignPoint, EngineConstants, PlantConfig};
use crate::error::{Error, Result};

/// Engine state advanced by the transient solver.
#[derive(Debug, Clone, Copy)]
pub struct PlantState {
    /// Physical spool speed, RPM.
    pub n_rpm: f64,
    /// Delivered fuel flow, kg/s.
    pub w_f: f64,
    /// Compressor map coordinate of the last converged match.
    pub beta_c: f64,
    /// Turbine pressure ratio of the last converged match.
    pub pi_t: f64,
}

/// Derived outputs of one converged operating point.
#[derive(Debug, Clone, Copy)]
pub struct StepOutput {
    /// Net thrust, N.
    pub thrust: f64,
    /// Turbine inlet total temperature, K.
    pub t_t: f64,
    /// Physical air mass flow, kg/s.
    pub w_c: f64,
    /// Limiter activity during the step.
    pub clamped: bool,
    /// Fuel command actually delivered to the fuel system, kg/s.
    pub v_applied: f64,
}

/// One full gas-path evaluation at fixed (beta_c, pi_t).
#[derive(Debug, Clone, Copy)]
struct CyclePoint {
    e_mc: f64,
    e_mn: f64,
    power_c: f64,
    power_t: f64,
    t_t: f64,
    w_c: f64,
    w_n: f64,
    v_n: f64,
    p_out: f64,
}

#[derive(Debug, Clone)]
pub struct Plant {
    pub constants: EngineConstants,
    pub design: DesignPoint,
    pub maps: SurrogateMaps,
    pub limiter: LimiterTables,
    /// Nozzle exit area, m^2 (sized at the design point).
    pub a_n: f64,
    /// Design-point thrust, N (sea-level static).
    pub f_dp: f64,
    /// Design-point fuel flow, kg/s (sea-level static).
    pub w_f_dp: f64,
    /// Critical nozzle pressure ratio.
    pub pi_n_crit: f64,
}

struct NozzleFlow {
    v_n: f64,
    w_n: f64,
    p_out: f64,
}

impl Plant {
    /// Build and size the plant: the turbine and nozzle geometry are
    /// derived from a design-point cycle balance, then the accessory load
    /// is calibrated so the idle steady fuel equals the normalization
    /// offset (0.04 kg/s), and the limiter tables are sampled from the
    /// steady-state operating line.
    pub fn new(config: PlantConfig) -> Result<Plant> {
        let mut plant = Plant::sized(&config)?;
        plant.calibrate_idle_fuel(0.04)?;
        plant.build_limiters(&config)?;
        Ok(plant)
    }

    pub fn default_plant() -> Result<Plant> {
        Plant::new(PlantConfig::default())
    }

    fn sized(config: &PlantConfig) -> Result<Plant> {
        let c = &config.constants;
        let d = &config.design;
        let gamma_g = c.gamma_g;

        // critical nozzle ratio: subcritical velocity equals the choked one
        let drop = gamma_g * c.r_gas / ((gamma_g + 1.0) * c.c_pg * c.eta_n);
        let pi_n_crit = (1.0 - drop).powf(gamma_g / (1.0 - gamma_g));

        let mut maps = SurrogateMaps {
            params: config.maps.clone(),
            pi_c_dp: d.pi_c_dp,
            w_c_dp: d.w_c_dp,
            n_corr_dp: d.n_dp,
            w_t_corr_dp: 1.0,
            pi_t_dp: 1.9,
            n_t_corr_dp: d.n_dp / 2.0,
            omega_dp: 1.0,
            gamma_a: c.gamma_a,
            gamma_g,
        };

        // design-point cycle at sea-level static, beta = 0.5
        let amb = Ambient::sea_level_static();
        let cp = maps.compressor(0.5, d.n_dp);
        let w_c = cp.w_corr / amb.theta_factor() * (amb.p1t / P_STD);
        let exp_a = (c.gamma_a - 1.0) / c.gamma_a;
        let dt_c = amb.t1t * (cp.pi_c.powf(exp_a) - 1.0) / cp.eta_c;
        let t_cc = amb.t1t + dt_c;
        let p2 = amb.p1t * cp.pi_c;
        let power_c = w_c * c.c_pa * dt_c;

        // loading reference sized so the design point sits at omega_dp
        let omega = w_c * (t_cc / T_REF).sqrt() / (p2 / P_STD);
        maps.omega_dp = omega;
        let temp_ratio = d.t_t_dp / t_cc;
        let p_cc = p2 * maps.sigma_cc(omega, temp_ratio);

        let cp_mean = mean_cp(t_cc, d.t_t_dp);
        let eta_b = maps.burner_efficiency(omega);
        let w_f_dp = w_c * cp_mean * (d.t_t_dp - t_cc) / (eta_b * c.h_l);
        let w_g = w_c + w_f_dp;

        // turbine must supply compressor plus accessory power
        let power_t = (power_c + c.p_load) / c.eta_m;
        let dt_rel = power_t / (w_g * c.c_pg) / d.t_t_dp;
        let expo = (1.0 - gamma_g) / gamma_g;
        let eta_t = config.maps.eta_t_dp;
        let inner = 1.0 - dt_rel / eta_t;
        if inner <= 0.0 {
            return Err(Error::invalid("plant sizing: turbine cannot supply design power"));
        }
        let pi_t_dp = inner.powf(1.0 / expo);
        maps.pi_t_dp = pi_t_dp;
        let theta_t = (d.t_t_dp / T_REF).sqrt();
        let delta_t = p_cc / P_STD;
        maps.w_t_corr_dp = w_g * theta_t / delta_t;
        maps.n_t_corr_dp = d.n_dp / theta_t;

        // nozzle sizing: pass the design gas flow
        let t5 = d.t_t_dp * (1.0 - dt_rel);
        let p5 = p_cc / pi_t_dp;
        let p_n = p5 * maps.sigma_exhaust();
        let mut plant = Plant {
            constants: c.clone(),
            design: d.clone(),
            maps,
            limiter: LimiterTables {
                n_corr: vec![0.0, 1.0],
                w_max: vec![1e9, 1e9],
                w_min: vec![0.0, 0.0],
            },
            a_n: 1.0,
            f_dp: 1.0,
            w_f_dp,
            pi_n_crit,
        };
        let unit_flow = plant.nozzle(t5, p_n, amb.p0)?;
        plant.a_n = w_g / unit_flow.w_n;
        let flow = plant.nozzle(t5, p_n, amb.p0)?;
        plant.f_dp = flow.w_n * flow.v_n + (flow.p_out - amb.p0) * plant.a_n;
        Ok(plant)
    }

    /// Adjust the accessory power draw until the idle steady fuel flow
    /// matches `target` (secant iteration, then re-size the hot section).
    fn calibrate_idle_fuel(&mut self, target: f64) -> Result<()> {
        let amb = Ambient::sea_level_static();
        for _ in 0..4 {
            let mut p0 = self.constants.p_load;
            let mut f0 = self.steady_fuel_at(self.design.n_idle, &amb)? - target;
            if f0.abs() < 1e-6 {
                break;
            }
            let mut p1 = p0 + 10e3;
            for _ in 0..20 {
                self.constants.p_load = p1;
                let f1 = self.steady_fuel_at(self.design.n_idle, &amb)? - target;
                if f1.abs() < 1e-9 {
                    break;
                }
                let span = f1 - f0;
                if span.abs() < 1e-15 {
                    break;
                }
                let p2 = (p1 - f1 * (p1 - p0) / span).clamp(0.0, 300e3);
                p0 = p1;
                f0 = f1;
                p1 = p2;
            }
            self.constants.p_load = p1;
            // re-derive turbine sizing with the updated load
            let cfg = PlantConfig {
                constants: self.constants.clone(),
                design: self.design.clone(),
                maps: self.maps.params.clone(),
                limiter: super::limiter::LimiterParams::default(),
            };
            let resized = Plant::sized(&cfg)?;
            self.maps = resized.maps;
            self.a_n = resized.a_n;
            self.f_dp = resized.f_dp;
            self.w_f_dp = resized.w_f_dp;
        }
        Ok(())
    }

    fn build_limiters(&mut self, config: &PlantConfig) -> Result<()> {
        let amb = Ambient::sea_level_static();
        let lo = self.design.n_idle - 500.0;
        let hi = (self.maps.n_corr_dp * (maps::SPEED_MAX - 0.03)).min(15_800.0);
        let count = 23;
        let mut grid = Vec::with_capacity(count);
        let mut steady = Vec::with_capacity(count);
        for i in 0..count {
            let n = lo + (hi - lo) * i as f64 / (count - 1) as f64;
            grid.push(n);
            steady.push(self.steady_fuel_at(n, &amb)?);
        }
        self.limiter = LimiterTables::from_steady_line(&grid, &steady, &config.limiter);
        Ok(())
    }

    /// Mean gas heat capacity in the combustor, J/(kg K).
    fn cp_mean(t_cc: f64, t_t: f64) -> f64 {
        mean_cp(t_cc, t_t)
    }

    /// Turbine inlet temperature from the combustion-chamber power
    /// balance, solved by fixed-point iteration to 0.01 K.
    pub fn combustor_exit_temp(&self, w_f: f64, w_cc: f64, t_cc: f64, p_cc: f64) -> Result<f64> {
        if w_f < 0.0 {
            return Err(Error::invalid("combustor_exit_temp: negative fuel flow"));
        }
        let omega = w_cc * (t_cc / T_REF).sqrt() / (p_cc / P_STD);
        let eta_b = self.maps.burner_efficiency(omega);
        let heat = eta_b * w_f * self.constants.h_l / w_cc;
        let mut t_t = t_cc + heat / Self::cp_mean(t_cc, t_cc + 700.0);
        for _ in 0..100 {
            let next = t_cc + heat / Self::cp_mean(t_cc, t_t);
            let delta = (next - t_t).abs();
            t_t = next;
            if delta <= 0.01 {
                return Ok(t_t);
            }
        }
        Err(Error::convergence(
            "combustor_exit_temp",
            format!("fixed point stalled at T_t = {t_t:.2} K"),
        ))
    }

    /// Nozzle velocity, mass flow and exit static pressure. Subcritical
    /// expansion below the critical ratio, choked conditions above it.
    /// Pressure ratios below 1 (only reachable by intermediate matching
    /// iterates) continue as a mirrored reverse flow so the Newton steps
    /// are steered back into the physical region.
    fn nozzle(&self, t_n: f64, p_n: f64, p0: f64) -> Result<NozzleFlow> {
        let c = &self.constants;
        if t_n <= 0.0 || p_n <= 0.0 {
            return Err(Error::invalid("nozzle: non-positive upstream state"));
        }
        let gamma = c.gamma_g;
        let expo = (1.0 - gamma) / gamma;
        let pi_n = p_n / p0;
        // near and below unity pressure ratio the square-root law has an
        // infinite slope; a steep linear continuation through zero keeps
        // the matching residual monotone for off-design iterates
        let pi_lin = 1.02;
        if pi_n < pi_lin {
            if pi_n < 0.2 {
                return Err(Error::invalid(format!(
                    "nozzle: pressure ratio {pi_n:.3} far below unity"
                )));
            }
            let rad = 2.0 * c.c_pg * t_n * (1.0 - pi_lin.powf(expo)) * c.eta_n;
            let v_ref = rad.max(0.0).sqrt();
            let density_term =
                (1.0 - c.eta_n * (1.0 - pi_lin.powf(expo))).powf(1.0 / (gamma - 1.0));
            let w_ref = c.mu_n * v_ref * p_n / (c.r_gas * t_n) * density_term * self.a_n;
            let frac = (pi_n - 1.0) / (pi_lin - 1.0);
            return Ok(NozzleFlow {
                v_n: v_ref * frac.clamp(0.0, 1.0),
                w_n: w_ref * frac,
                p_out: p0,
            });
        }
        let (v_n, bracket_pi, p_out) = if pi_n < self.pi_n_crit {
            let rad = 2.0 * c.c_pg * t_n * (1.0 - pi_n.powf(expo)) * c.eta_n;
            if rad < 0.0 {
                return Err(Error::invalid("nozzle: negative velocity radicand"));
            }
            (rad.sqrt(), pi_n, p0)
        } else {
            let v = (2.0 * gamma / (gamma + 1.0) * c.r_gas * t_n).sqrt();
            (v, self.pi_n_crit, p_n / self.pi_n_crit)
        };
        let density_term = (1.0 - c.eta_n * (1.0 - bracket_pi.powf(expo))).powf(1.0 / (gamma - 1.0));
        let w_n = c.mu_n * v_n * p_n / (c.r_gas * t_n) * density_term * self.a_n;
        Ok(NozzleFlow { v_n, w_n, p_out })
    }

    /// Public probe of the nozzle branch logic (velocity, flow, momentum
    /// and pressure thrust terms). Requires a physical expansion,
    /// `p_n >= p0`.
    pub fn nozzle_eval(&self, t_n: f64, p_n: f64, p0: f64) -> Result<(f64, f64, f64, f64)> {
        if p_n < p0 {
            return Err(Error::invalid(format!(
                "nozzle_eval: total pressure {p_n:.1} below ambient {p0:.1}"
            )));
        }
        let f = self.nozzle(t_n, p_n, p0)?;
        Ok((f.v_n, f.w_n, f.w_n * f.v_n, (f.p_out - p0) * self.a_n))
    }

    /// Evaluate the whole gas path at fixed matching variables.
    fn cycle(&self, n_rpm: f64, w_f: f64, beta: f64, pi_t: f64, amb: &Ambient) -> Result<CyclePoint> {
        let c = &self.constants;
        let n_corr = n_rpm * amb.theta_factor();
        let n_rel = n_corr / self.maps.n_corr_dp;
        if !SurrogateMaps::in_domain(beta, n_rel) {
            return Err(Error::invalid(format!(
                "cycle: point (beta={beta:.3}, n_rel={n_rel:.3}) outside map domain"
            )));
        }
        let cp = self.maps.compressor(beta, n_corr);
        let w_c = cp.w_corr / amb.theta_factor() * (amb.p1t / P_STD);
        let exp_a = (c.gamma_a - 1.0) / c.gamma_a;
        let dt_c = amb.t1t * (cp.pi_c.powf(exp_a) - 1.0) / cp.eta_c;
        let t_cc = amb.t1t + dt_c;
        let p2 = amb.p1t * cp.pi_c;
        let power_c = w_c * c.c_pa * dt_c;

        let omega = w_c * (t_cc / T_REF).sqrt() / (p2 / P_STD);
        // pressure losses need T_t; one refinement pass is enough for the
        // weak coupling through sigma_cc
        let mut p_cc = p2 * self.maps.sigma_cc(omega, 1.8);
        let mut t_t = self.combustor_exit_temp(w_f, w_c, t_cc, p_cc)?;
        p_cc = p2 * self.maps.sigma_cc(omega, t_t / t_cc);
        t_t = self.combustor_exit_temp(w_f, w_c, t_cc, p_cc)?;

        let w_g = w_c + w_f;
        let theta_t = (t_t / T_REF).sqrt();
        let n_t_corr = n_rpm / theta_t;
        let tp = self.maps.turbine(n_t_corr, pi_t);
        let w_t_phys = tp.w_corr * (p_cc / P_STD) / theta_t;
        let power_t = w_g * c.c_pg * t_t * tp.dt_rel;

        let t5 = t_t * (1.0 - tp.dt_rel);
        let p5 = p_cc / pi_t;
        let p_n = p5 * self.maps.sigma_exhaust();
        let noz = self.nozzle(t5, p_n, amb.p0)?;

        Ok(CyclePoint {
            e_mc: w_t_phys - w_g,
            e_mn: noz.w_n - w_g,
            power_c,
            power_t,
            t_t,
            w_c,
            w_n: noz.w_n,
            v_n: noz.v_n,
            p_out: noz.p_out,
        })
    }

    /// Newton-Raphson matching of (beta_c, pi_t) so both mass-flow
    /// residuals vanish. `guess` warm-starts the iteration.
    pub fn nr_match(
        &self,
        n_rpm: f64,
        w_f: f64,
        amb: &Ambient,
        guess: (f64, f64),
    ) -> Result<(f64, f64, CycleOutputs)> {
        let tol = 1e-6 * self.design.w_c_dp;
        let (mut beta, mut pi_t) = guess;
        beta = beta.clamp(maps::BETA_MIN, maps::BETA_MAX);
        pi_t = pi_t.clamp(maps::PI_T_MIN, maps::PI_T_MAX);
        let h = 1e-4;
        let mut trace = Vec::new();
        for _ in 0..50 {
            let base = self.cycle(n_rpm, w_f, beta, pi_t, amb)?;
            trace.push((base.e_mc, base.e_mn));
            if base.e_mc.abs() <= tol && base.e_mn.abs() <= tol {
                return Ok((beta, pi_t, CycleOutputs::from(&base)));
            }
            let hb = if beta + h <= maps::BETA_MAX { h } else { -h };
            let hp = if pi_t + h <= maps::PI_T_MAX { h } else { -h };
            let db = self.cycle(n_rpm, w_f, beta + hb, pi_t, amb)?;
            let dp = self.cycle(n_rpm, w_f, beta, pi_t + hp, amb)?;
            let j11 = (db.e_mc - base.e_mc) / hb;
            let j12 = (dp.e_mc - base.e_mc) / hp;
            let j21 = (db.e_mn - base.e_mn) / hb;
            let j22 = (dp.e_mn - base.e_mn) / hp;
            let det = j11 * j22 - j12 * j21;
            if !det.is_finite() || det.abs() < 1e-14 {
                return Err(Error::convergence(
                    "nr_match",
                    format!("singular Jacobian, residual trace {trace:?}"),
                ));
            }
            let step_b = (j22 * base.e_mc - j12 * base.e_mn) / det;
            let step_p = (-j21 * base.e_mc + j11 * base.e_mn) / det;
            // backtracking keeps strongly off-design iterates from bouncing
            let base_norm = base.e_mc.hypot(base.e_mn);
            let mut scale = 1.0;
            let mut accepted = false;
            for _ in 0..6 {
                let b_try = (beta - scale * step_b).clamp(maps::BETA_MIN, maps::BETA_MAX);
                let p_try = (pi_t - scale * step_p).clamp(maps::PI_T_MIN, maps::PI_T_MAX);
                match self.cycle(n_rpm, w_f, b_try, p_try, amb) {
                    Ok(trial) if trial.e_mc.hypot(trial.e_mn) < base_norm => {
                        beta = b_try;
                        pi_t = p_try;
                        accepted = true;
                        break;
                    }
                    _ => scale *= 0.5,
                }
            }
            if !accepted {
                beta = (beta - scale * step_b).clamp(maps::BETA_MIN, maps::BETA_MAX);
                pi_t = (pi_t - scale * step_p).clamp(maps::PI_T_MIN, maps::PI_T_MAX);
            }
        }
        let tail: Vec<_> = trace.iter().rev().take(4).collect();
        Err(Error::convergence(
            "nr_match",
            format!("no convergence in 50 iterations at N={n_rpm:.0}, Wf={w_f:.4}; last residuals {tail:?}"),
        ))
    }

    /// Spool acceleration at a converged operating point, RPM/s.
    fn n_dot(&self, n_rpm: f64, point: &CycleOutputs) -> f64 {
        let c = &self.constants;
        let omega_factor = 30.0 / std::f64::consts::PI;
        // torque = power / omega; Eq-of-motion in RPM
        let torque_net = omega_factor
            * (point.power_t * c.eta_m - point.power_c - c.p_load)
            / n_rpm.max(1.0);
        omega_factor * torque_net / c.inertia
    }

    /// Steady-state fuel flow holding `n_rpm` at the given ambient
    /// (bisection on the net-power balance).
    pub fn steady_fuel_at(&self, n_rpm: f64, amb: &Ambient) -> Result<f64> {
        let n_rel = n_rpm * amb.theta_factor() / self.maps.n_corr_dp;
        // estimated steady line keeps the search inside the matchable
        // envelope; off-design fuel far above it has no matched solution
        let est = (self.w_f_dp * n_rel.powf(1.9)).max(5e-3);
        let mut lo = 0.2 * est;
        let mut hi = 1.1 * est;
        let mut guess = self.cold_guess(n_rpm, amb);
        let imbalance = |w_f: f64, guess: &mut (f64, f64)| -> Result<f64> {
            let (b, p, out) = self.nr_match(n_rpm, w_f, amb, *guess)?;
            *guess = (b, p);
            Ok(out.power_t * self.constants.eta_m - out.power_c - self.constants.p_load)
        };
        let mut f_lo = imbalance(lo, &mut guess)?;
        for _ in 0..12 {
            if f_lo <= 0.0 {
                break;
            }
            lo *= 0.6;
            f_lo = imbalance(lo, &mut guess)?;
        }
        if f_lo > 0.0 {
            return Err(Error::invalid(format!(
                "steady_fuel_at: N = {n_rpm:.0} RPM sustains itself below the fuel floor"
            )));
        }
        let mut f_hi = imbalance(hi, &mut guess)?;
        for _ in 0..12 {
            if f_hi >= 0.0 {
                break;
            }
            hi *= 1.25;
            f_hi = imbalance(hi, &mut guess)?;
        }
        if f_hi < 0.0 {
            return Err(Error::invalid(format!(
                "steady_fuel_at: N = {n_rpm:.0} RPM unreachable within fuel range"
            )));
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let f_mid = imbalance(mid, &mut guess)?;
            if f_mid > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-12 {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Initial matching guess for a cold start.
    pub fn cold_guess(&self, n_rpm: f64, amb: &Ambient) -> (f64, f64) {
        let n_rel = (n_rpm * amb.theta_factor() / self.maps.n_corr_dp).clamp(0.3, 1.1);
        let pi_t = 1.0 + (self.maps.pi_t_dp - 1.0) * n_rel.powf(1.1);
        (0.5, pi_t.clamp(maps::PI_T_MIN, maps::PI_T_MAX))
    }

    /// Clamp a physical fuel command against the corrected-domain limiter
    /// schedules.
    pub fn fuel_limiters(&self, n_rpm: f64, v_cmd: f64, amb: &Ambient) -> (f64, bool) {
        let n_corr = n_rpm * amb.theta_factor();
        let to_corr = amb.theta_factor() * amb.delta_factor();
        let (v_corr, flag) = self.limiter.clamp(n_corr, v_cmd * to_corr);
        (v_corr / to_corr, flag)
    }

    /// Advance the plant by `dt`: the fuel command passes the limiters,
    /// the fuel state follows the exact first-order lag, and the spool
    /// integrates the torque balance with the matched gas path evaluated
    /// at every stage.
    pub fn clm_step(
        &self,
        state: &PlantState,
        v_cmd: f64,
        amb: &Ambient,
        dt: f64,
    ) -> Result<(PlantState, StepOutput)> {
        let (v_applied, clamped) = self.fuel_limiters(state.n_rpm, v_cmd, amb);
        let t_f = self.constants.t_f;
        let w_f0 = state.w_f;
        let fuel_at = |tau: f64| v_applied + (w_f0 - v_applied) * (-tau / t_f).exp();

        let mut guess = (state.beta_c, state.pi_t);
        let rhs = |tau: f64, n: f64, guess: &mut (f64, f64)| -> Result<f64> {
            let (b, p, out) = self.nr_match(n, fuel_at(tau), amb, *guess)?;
            *guess = (b, p);
            Ok(self.n_dot(n, &out))
        };

        // RK4 with the analytic intra-step fuel trajectory
        let n0 = state.n_rpm;
        let k1 = rhs(0.0, n0, &mut guess)?;
        let k2 = rhs(dt / 2.0, n0 + dt / 2.0 * k1, &mut guess)?;
        let k3 = rhs(dt / 2.0, n0 + dt / 2.0 * k2, &mut guess)?;
        let k4 = rhs(dt, n0 + dt * k3, &mut guess)?;
        let n_next = n0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let w_f_next = fuel_at(dt);

        let (beta, pi_t, out) = self.nr_match(n_next, w_f_next, amb, guess)?;
        let thrust = out.w_n * out.v_n
            - out.w_c * amb.m0 * (self.constants.gamma_a * self.constants.r_gas * amb.t0).sqrt()
            + (out.p_out - amb.p0) * self.a_n;
        Ok((
            PlantState {
                n_rpm: n_next,
                w_f: w_f_next,
                beta_c: beta,
                pi_t,
            },
            StepOutput {
                thrust,
                t_t: out.t_t,
                w_c: out.w_c,
                clamped,
                v_applied,
            },
        ))
    }

    /// Equilibrium state at a spool speed (steady fuel, converged match).
    pub fn steady_state(&self, n_rpm: f64, amb: &Ambient) -> Result<PlantState> {
        let w_f = self.steady_fuel_at(n_rpm, amb)?;
        let (beta, pi_t, _) = self.nr_match(n_rpm, w_f, amb, self.cold_guess(n_rpm, amb))?;
        Ok(PlantState {
            n_rpm,
            w_f,
            beta_c: beta,
            pi_t,
        })
    }
}

/// Converged-point outputs exposed by the matcher.
#[derive(Debug, Clone, Copy)]
pub struct CycleOutputs {
    pub power_c: f64,
    pub power_t: f64,
    pub t_t: f64,
    pub w_c: f64,
    pub w_n: f64,
    pub v_n: f64,
    pub p_out: f64,
}

impl From<&CyclePoint> for CycleOutputs {
    fn from(p: &CyclePoint) -> Self {
        CycleOutputs {
            power_c: p.power_c,
            power_t: p.power_t,
            t_t: p.t_t,
            w_c: p.w_c,
            w_n: p.w_n,
            v_n: p.v_n,
            p_out: p.p_out,
        }
    }
}

fn mean_cp(t_cc: f64, t_t: f64) -> f64 {
    950.0 + 0.18 * 0.5 * (t_cc + t_t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::isa_inlet;

    fn plant() -> Plant {
        Plant::default_plant().expect("default plant builds")
    }

    #[test]
    fn sizing_is_consistent_at_design() {
        let p = plant();
        let amb = Ambient::sea_level_static();
        // the design point itself must match with beta == 0.5
        let w_f_dp = p.steady_fuel_at(p.design.n_dp, &amb).unwrap();
        let (beta, pi_t, out) = p
            .nr_match(p.design.n_dp, w_f_dp, &amb, p.cold_guess(p.design.n_dp, &amb))
            .unwrap();
        assert!((beta - 0.5).abs() < 0.08, "design beta {beta}");
        assert!((pi_t - p.maps.pi_t_dp).abs() < 0.08, "design pi_t {pi_t}");
        assert!((out.t_t - p.design.t_t_dp).abs() < 40.0, "design T_t {}", out.t_t);
    }

    #[test]
    fn idle_fuel_calibrated() {
        let p = plant();
        let amb = Ambient::sea_level_static();
        let w_idle = p.steady_fuel_at(p.design.n_idle, &amb).unwrap();
        assert!((w_idle - 0.04).abs() < 2e-3, "idle fuel {w_idle}");
    }

    #[test]
    fn combustor_zero_fuel_identity() {
        let p = plant();
        let t = p.combustor_exit_temp(0.0, 10.0, 450.0, 3e5).unwrap();
        assert!((t - 450.0).abs() < 1e-9);
    }

    #[test]
    fn combustor_constant_cp_closed_form_and_linearity() {
        let p = plant();
        // pick temperatures where cp_mean barely changes so the one-step
        // closed form is accurate
        let w_cc = 10.0;
        let t_cc = 500.0;
        let p_cc = 3e5;
        let t1 = p.combustor_exit_temp(0.01, w_cc, t_cc, p_cc).unwrap();
        let t2 = p.combustor_exit_temp(0.02, w_cc, t_cc, p_cc).unwrap();
        assert!(t1 > t_cc);
        // doubling fuel roughly doubles the rise (cp drifts slightly)
        let r = (t2 - t_cc) / (t1 - t_cc);
        assert!((r - 2.0).abs() < 0.05, "rise ratio {r}");
    }

    #[test]
    fn nozzle_branches() {
        let p = plant();
        // no pressure ratio -> no velocity
        let (v, _, mom, press) = p.nozzle_eval(800.0, 101_325.0, 101_325.0).unwrap();
        assert!(v.abs() < 1e-9 && mom.abs() < 1e-9 && press.abs() < 1e-12);
        // choked velocity independent of the pressure ratio
        let (v1, _, _, _) = p.nozzle_eval(900.0, 2.2e5, 101_325.0).unwrap();
        let (v2, _, _, _) = p.nozzle_eval(900.0, 2.6e5, 101_325.0).unwrap();
        assert!((v1 - v2).abs() < 1e-9);
        let g = p.constants.gamma_g;
        let expect = (2.0 * g / (g + 1.0) * p.constants.r_gas * 900.0).sqrt();
        assert!((v1 - expect).abs() < 1e-9);
        // below ambient rejected
        assert!(p.nozzle_eval(900.0, 0.9e5, 101_325.0).is_err());
    }

    #[test]
    fn critical_ratio_near_ideal_value() {
        // with eta_n = 1 and gamma = 1.33 the ideal critical ratio is
        // ((gamma+1)/2)^(gamma/(gamma-1)) ~ 1.85
        let mut cfg = PlantConfig::default();
        cfg.constants.eta_n = 1.0;
        let p = Plant::new(cfg).unwrap();
        let ideal = (0.5_f64 * (1.33 + 1.0)).powf(1.33 / 0.33);
        assert!((p.pi_n_crit - ideal).abs() < 0.02, "crit {}", p.pi_n_crit);
    }

    #[test]
    fn matched_residuals_within_tolerance() {
        let p = plant();
        let amb = Ambient::sea_level_static();
        let st = p.steady_state(10_000.0, &amb).unwrap();
        // re-evaluate the residuals at the converged point
        let (_, _, _) = p
            .nr_match(st.n_rpm, st.w_f, &amb, (st.beta_c, st.pi_t))
            .unwrap();
    }

    #[test]
    fn warm_start_converges_fast() {
        let p = plant();
        let amb = Ambient::sea_level_static();
        let st = p.steady_state(11_000.0, &amb).unwrap();
        // small fuel perturbation from a converged point
        let res = p.nr_match(st.n_rpm, st.w_f * 1.02, &amb, (st.beta_c, st.pi_t));
        assert!(res.is_ok());
    }

    #[test]
    fn steady_line_strictly_increasing() {
        let p = plant();
        let amb = Ambient::sea_level_static();
        let mut prev = 0.0;
        for i in 0..=10 {
            let n = 5000.0 + 1000.0 * i as f64;
            let w = p.steady_fuel_at(n, &amb).unwrap();
            assert!(w > prev, "steady fuel not increasing at {n}");
            prev = w;
        }
    }

    #[test]
    fn torque_balance_holds_at_steady_state() {
        let p = plant();
        let amb = Ambient::sea_level_static();
        let st = p.steady_state(9000.0, &amb).unwrap();
        let (s2, _) = p.clm_step(&st, st.w_f, &amb, 0.01).unwrap();
        assert!((s2.n_rpm - st.n_rpm).abs() < 0.05, "drift {}", s2.n_rpm - st.n_rpm);
    }

    #[test]
    fn fuel_lag_first_order_response() {
        let p = plant();
        let amb = Ambient::sea_level_static();
        let mut st = p.steady_state(9000.0, &amb).unwrap();
        let w0 = st.w_f;
        let target = w0 * 1.2;
        let steps = (p.constants.t_f / 0.01).round() as usize;
        for _ in 0..steps {
            let (s, _) = p.clm_step(&st, target, &amb, 0.01).unwrap();
            st = s;
        }
        let frac = (st.w_f - w0) / (target - w0);
        assert!((frac - 0.632).abs() < 0.01, "lag fraction {frac}");
    }

    #[test]
    fn steady_point_held_ten_seconds() {
        let p = plant();
        let amb = Ambient::sea_level_static();
        let mut st = p.steady_state(12_000.0, &amb).unwrap();
        let n0 = st.n_rpm;
        for _ in 0..1000 {
            let (s, _) = p.clm_step(&st, st.w_f, &amb, 0.01).unwrap();
            st = s;
        }
        assert!((st.n_rpm - n0).abs() < 1.0, "drift {} RPM", st.n_rpm - n0);
    }

    #[test]
    fn limiter_clamps_and_flags_through_step() {
        let p = plant();
        let amb = Ambient::sea_level_static();
        let st = p.steady_state(8000.0, &amb).unwrap();
        let (_, out) = p.clm_step(&st, 5.0, &amb, 0.01).unwrap();
        assert!(out.clamped);
        assert!(out.v_applied < 5.0);
        let (_, out) = p.clm_step(&st, st.w_f, &amb, 0.01).unwrap();
        assert!(!out.clamped);
    }

    #[test]
    fn decel_to_idle_is_monotone() {
        let p = plant();
        let amb = Ambient::sea_level_static();
        let idle_fuel = p.steady_fuel_at(p.design.n_idle, &amb).unwrap();
        let mut st = p.steady_state(13_000.0, &amb).unwrap();
        let mut prev = st.n_rpm;
        let mut t = 0.0;
        while t < 12.0 && st.n_rpm > p.design.n_idle + 50.0 {
            let (s, _) = p.clm_step(&st, idle_fuel, &amb, 0.01).unwrap();
            st = s;
            assert!(st.n_rpm <= prev + 1e-6, "non-monotone decay at t={t}");
            prev = st.n_rpm;
            t += 0.01;
        }
        assert!(st.n_rpm < p.design.n_idle + 600.0, "did not reach idle region: {}", st.n_rpm);
    }

    #[test]
    fn energy_sanity_thrust_and_temperature() {
        let p = plant();
        let amb = Ambient::sea_level_static();
        for n in [6000.0, 9000.0, 12_000.0, 14_000.0] {
            let st = p.steady_state(n, &amb).unwrap();
            let (_, out) = p.clm_step(&st, st.w_f, &amb, 0.01).unwrap();
            assert!(out.thrust >= 0.0, "negative thrust at {n}");
            assert!(out.t_t > amb.t1t);
        }
    }

    #[test]
    fn altitude_flight_point_runs() {
        let p = plant();
        let amb = isa_inlet(6000.0, 0.5).unwrap();
        let st = p.steady_state(12_000.0, &amb).unwrap();
        let (s2, out) = p.clm_step(&st, st.w_f, &amb, 0.01).unwrap();
        assert!((s2.n_rpm - st.n_rpm).abs() < 0.1);
        assert!(out.thrust > 0.0);
    }
}
