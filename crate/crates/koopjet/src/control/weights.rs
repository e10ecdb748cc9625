//! Genetic optimization of the LQI weighting matrices under margin
//! constraints.
//!
//! Each candidate sets the state weights (spool speed, integral, fuel,
//! plus per-mode perturbations), designs the gain schedule through the
//! Riccati equation, evaluates the classical margins of the observer
//! loop, and scores a weighted-IAE cost on a closed-loop simulation of
//! the eigenfunction model over the optimization command profile.

use super::lqgi::{lqi_design, LqgiDesign};
use super::margins::{default_frequency_grid, margins_of_design, MarginReport};
use crate::datakit::NormalizationSpec;
use crate::error::{Error, Result};
use crate::koopman::KoopmanModel;
use crate::numerics::{ga_minimize, GaConfig};
use nalgebra::{DMatrix, DVector};

/// Command profile for the optimization runs: relative spool-speed
/// demand with its error-weight schedule.
#[derive(Debug, Clone)]
pub struct CommandProfile {
    pub dt: f64,
    pub nbar_d: Vec<f64>,
    pub w_e: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct WeightOptConfig {
    /// Gain-schedule design grid over the normalized range.
    pub grid: Vec<f64>,
    /// Overshoot / undershoot penalty weights.
    pub alpha_os: f64,
    pub alpha_us: f64,
    /// Margin constraints (classical, at every grid point).
    pub gm_min_db: f64,
    pub pm_min_deg: f64,
    pub margin_penalty: f64,
    /// Search box: scalar weights in log10, mode perturbations relative.
    pub log_weight_bounds: (f64, f64),
    pub dq_bound: f64,
    pub t_f: f64,
    pub n_nominal_rpm: f64,
    pub norm: NormalizationSpec,
    pub freq_points: usize,
}

impl Default for WeightOptConfig {
    fn default() -> Self {
        WeightOptConfig {
            grid: (0..21).map(|i| i as f64 / 20.0).collect(),
            alpha_os: 100.0,
            alpha_us: 100.0,
            gm_min_db: 6.0,
            pm_min_deg: 60.0,
            margin_penalty: 1e5,
            log_weight_bounds: (-2.0, 4.0),
            dq_bound: 0.5,
            t_f: 0.1,
            n_nominal_rpm: 14_000.0,
            norm: NormalizationSpec::default(),
            freq_points: 300,
        }
    }
}

#[derive(Debug, Clone)]
pub struct WeightOptResult {
    pub design: LqgiDesign,
    pub margins: MarginReport,
    pub cost: f64,
    /// Weighted IAE of the winning candidate on the profile (relative
    /// units).
    pub wiae: f64,
    pub decision: Vec<f64>,
}

/// Assemble the block state weighting matrix from a decision vector:
/// `Q_Phi = C^T Q_N C + dQ_Phi`, then fuel and integral weights.
fn build_q_z(kem: &KoopmanModel, x: &[f64]) -> (DMatrix<f64>, f64) {
    let n = kem.dim();
    let q_n = 10f64.powf(x[0]);
    let q_i = 10f64.powf(x[1]);
    let q_f = 10f64.powf(x[2]);
    let dim = n + 2;
    let mut q = DMatrix::zeros(dim, dim);
    let c = &kem.c;
    for i in 0..n {
        for j in 0..n {
            q[(i, j)] = c[i] * q_n * c[j];
        }
    }
    for j in 0..n {
        let base = c[j] * q_n * c[j];
        q[(j, j)] += x[3 + j] * base;
    }
    q[(n, n)] = q_f;
    q[(n + 1, n + 1)] = q_i;
    (q, 1.0)
}

/// Closed-loop simulation of the eigenfunction model under the candidate
/// schedule (true-state feedback, fuel lag, limiter clamp with integral
/// hold) and the weighted-IAE cost.
#[allow(clippy::too_many_arguments)]
fn simulate_candidate<FB>(
    kem: &KoopmanModel,
    design: &LqgiDesign,
    profile: &CommandProfile,
    bounds: &FB,
    cfg: &WeightOptConfig,
    init: (f64, f64),
) -> Option<(f64, f64)>
where
    FB: Fn(f64) -> (f64, f64) + Sync,
{
    let dt = profile.dt;
    let norm = &cfg.norm;
    let to_norm = |nbar: f64| (nbar * cfg.n_nominal_rpm - norm.o_n) / norm.s_n;
    let to_rel = |n: f64| (n * norm.s_n + norm.o_n) / cfg.n_nominal_rpm;

    let (n0, wf0) = init;
    let mut phi = kem.phi(n0);
    let mut wf = wf0;
    let mut eta = 0.0;
    let mut wiae = 0.0;
    let mut prev_abs_e = (profile.nbar_d[0] - to_rel(kem.output(&phi))).abs();
    let mut nbar_max = f64::NEG_INFINITY;
    let mut nbar_min = f64::INFINITY;
    let dim = phi.len();

    for k in 0..profile.nbar_d.len() {
        let n = kem.output(&phi);
        let nbar = to_rel(n);
        nbar_max = nbar_max.max(nbar);
        nbar_min = nbar_min.min(nbar);
        let e_rel = profile.nbar_d[k] - nbar;
        if k > 0 {
            wiae += profile.w_e[k] * 0.5 * (prev_abs_e + e_rel.abs()) * dt;
        }
        prev_abs_e = e_rel.abs();

        let gain = design.schedule.gain_at(n);
        let mut v = 0.0;
        for i in 0..dim {
            v -= gain[i] * phi[i];
        }
        v -= gain[dim] * wf;
        v -= gain[dim + 1] * eta;
        let (lo, hi) = bounds(n);
        let clamped = v < lo || v > hi;
        let v = v.clamp(lo, hi);
        if !clamped {
            eta += dt * (to_norm(profile.nbar_d[k]) - n);
        }
        wf = (1.0 - dt / cfg.t_f) * wf + dt / cfg.t_f * v;
        let d_phi = kem.lambda_apply(&phi) + kem.input_map(n) * wf;
        phi += d_phi * dt;
        if !kem.output(&phi).is_finite() {
            return None;
        }
    }
    let cost = wiae
        + cfg.alpha_os * (nbar_max - 1.0).abs()
        + cfg.alpha_us * (nbar_min - 0.5).abs();
    Some((cost, wiae))
}

/// Optimize the weighting matrices with a genetic search. The decision
/// vector is `[log10 Q_N, log10 Q_i, log10 Q_f, dq_1 .. dq_n]` with the
/// input weight fixed at 1 as the scale anchor.
pub fn optimize_weights<FB>(
    kem: &KoopmanModel,
    kalman_gain: &DVector<f64>,
    profile: &CommandProfile,
    bounds: &FB,
    init: (f64, f64),
    ga: &GaConfig,
    cfg: &WeightOptConfig,
) -> Result<WeightOptResult>
where
    FB: Fn(f64) -> (f64, f64) + Sync,
{
    let n = kem.dim();
    let mut box_bounds = vec![cfg.log_weight_bounds; 3];
    box_bounds.extend(vec![(-cfg.dq_bound, cfg.dq_bound); n]);
    let omega: Vec<f64> = {
        let full = default_frequency_grid();
        let stride = (full.len() / cfg.freq_points.max(2)).max(1);
        full.into_iter().step_by(stride).collect()
    };

    let evaluate = |x: &[f64]| -> f64 {
        let (q_z, r_c) = build_q_z(kem, x);
        let schedule = match lqi_design(kem, &q_z, r_c, &cfg.grid, cfg.t_f) {
            Ok(s) => s,
            Err(_) => return 1e8,
        };
        let design = LqgiDesign {
            schedule,
            kalman_gain: kalman_gain.clone(),
            q_z,
            r_c,
            t_f: cfg.t_f,
        };
        let margins = match margins_of_design(kem, &design, &cfg.grid, &omega) {
            Ok(m) => m,
            Err(_) => return 1e8,
        };
        let mut penalty = 0.0;
        if margins.gm_min_db < cfg.gm_min_db {
            penalty += cfg.margin_penalty * (cfg.gm_min_db - margins.gm_min_db);
        }
        if margins.pm_min_deg < cfg.pm_min_deg {
            penalty += cfg.margin_penalty * (cfg.pm_min_deg - margins.pm_min_deg);
        }
        match simulate_candidate(kem, &design, profile, bounds, cfg, init) {
            Some((cost, _)) => cost + penalty,
            None => 1e8,
        }
    };

    let mut ga_cfg = ga.clone();
    ga_cfg.bounds = box_bounds;
    if ga_cfg.seed_candidates.is_empty() {
        // baseline and progressively more aggressive integral seeds
        let mut mild = vec![0.0; 3 + n];
        mild[1] = 1.0;
        let mut hot = vec![0.0; 3 + n];
        hot[0] = 1.5;
        hot[1] = 2.5;
        hot[2] = -1.0;
        ga_cfg.seed_candidates = vec![vec![0.0; 3 + n], mild, hot];
    }
    let (best, cost) = ga_minimize(evaluate, &ga_cfg)?;

    let (q_z, r_c) = build_q_z(kem, &best);
    let schedule = lqi_design(kem, &q_z, r_c, &cfg.grid, cfg.t_f)
        .map_err(|e| Error::Infeasible(format!("optimize_weights: winning candidate failed: {e}")))?;
    let design = LqgiDesign {
        schedule,
        kalman_gain: kalman_gain.clone(),
        q_z,
        r_c,
        t_f: cfg.t_f,
    };
    let margins = margins_of_design(kem, &design, &cfg.grid, &omega)?;
    if margins.gm_min_db < cfg.gm_min_db || margins.pm_min_deg < cfg.pm_min_deg {
        return Err(Error::Infeasible(format!(
            "optimize_weights: no candidate satisfied the margins (best GM {:.2} dB, PM {:.1} deg)",
            margins.gm_min_db, margins.pm_min_deg
        )));
    }
    let (_, wiae) = simulate_candidate(kem, &design, profile, bounds, cfg, init)
        .ok_or_else(|| Error::convergence("optimize_weights", "winning candidate diverged"))?;
    Ok(WeightOptResult {
        design,
        margins,
        cost,
        wiae,
        decision: best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::koopman::{KemBlock, LfExpansion};
    use crate::sindy::{LogisticTerm, Term};

    fn linearish() -> LfExpansion {
        let lf0 = 1.0 / (1.0 + 0.5f64.exp());
        LfExpansion {
            terms: vec![
                LogisticTerm { xi: 4.0, eps: 1.0, mu: 0.5 },
                LogisticTerm { xi: -8.0 * lf0, eps: 0.0, mu: 0.0 },
            ],
        }
    }

    fn test_kem() -> KoopmanModel {
        let phi = linearish();
        let scale = phi.eval(1.0);
        KoopmanModel {
            blocks: vec![
                KemBlock::Real { lambda: -1.2, phi: phi.clone() },
                KemBlock::Real { lambda: -4.0, phi },
            ],
            c: DVector::from_vec(vec![1.0 / scale, 0.1]),
            g_terms: vec![Term::Constant { xi: 0.8 }],
            lpv: None,
        }
    }

    fn short_profile() -> CommandProfile {
        let dt = 0.01;
        let steps = 3000;
        let mut nbar_d = Vec::with_capacity(steps);
        let mut w_e = Vec::with_capacity(steps);
        for k in 0..steps {
            let t = k as f64 * dt;
            nbar_d.push(if t < 5.0 {
                0.5
            } else if t < 15.0 {
                0.8
            } else if t < 20.0 {
                0.5
            } else {
                1.0
            });
            w_e.push(if t < 5.0 { 0.0 } else { 1.0 });
        }
        CommandProfile { dt, nbar_d, w_e }
    }

    #[test]
    fn decision_dimension_and_q_structure() {
        let kem = test_kem();
        let n = kem.dim();
        let x = vec![0.5, 1.0, -0.5, 0.1, -0.2];
        assert_eq!(x.len(), 3 + n);
        let (q, r) = build_q_z(&kem, &x);
        assert_eq!(r, 1.0);
        assert_eq!(q.shape(), (n + 2, n + 2));
        // symmetric
        assert!((q.clone() - q.transpose()).amax() < 1e-12);
    }

    #[test]
    fn optimizes_and_meets_margins() {
        let kem = test_kem();
        let n = kem.dim();
        let profile = short_profile();
        let bounds = |_n: f64| (0.0, 1.5);
        let mut ga = GaConfig::new(20, 8, vec![], 77);
        ga.elite_count = 2;
        let mut cfg = WeightOptConfig::default();
        cfg.grid = (0..9).map(|i| i as f64 / 8.0).collect();
        cfg.freq_points = 120;
        let kalman = DVector::from_vec(vec![0.6, 0.2]);
        let res = optimize_weights(&kem, &kalman, &profile, &bounds, (0.2, 0.1), &ga, &cfg).unwrap();
        assert!(res.margins.gm_min_db >= cfg.gm_min_db);
        assert!(res.margins.pm_min_deg >= cfg.pm_min_deg);
        assert_eq!(res.decision.len(), 3 + n);

        // non-worsening against the identity seed
        let (q_seed, r_seed) = build_q_z(&kem, &vec![0.0; 3 + n]);
        let sched = lqi_design(&kem, &q_seed, r_seed, &cfg.grid, cfg.t_f).unwrap();
        let seed_design = LqgiDesign {
            schedule: sched,
            kalman_gain: kalman.clone(),
            q_z: q_seed,
            r_c: r_seed,
            t_f: cfg.t_f,
        };
        let (seed_cost, _) =
            simulate_candidate(&kem, &seed_design, &profile, &bounds, &cfg, (0.2, 0.1)).unwrap();
        assert!(
            res.cost <= seed_cost + 1e-9,
            "GA cost {} worse than seed {}",
            res.cost,
            seed_cost
        );
    }
}
