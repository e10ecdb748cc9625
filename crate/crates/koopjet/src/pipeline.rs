//! End-to-end orchestration: closed-loop data generation against the
//! reference plant, governing-equation identification, spectral model
//! construction, controller design and the benchmark tournament.

use crate::bench::{
    canonical_profile, compute_metrics, disturbance_scenario, run_tracking,
    varying_flight_scenario, ControllerSet, Metrics, Scenario, Trace,
};
use crate::control::{
    estimate_noise, kalman_design, lpv_pi_design, optimize_weights, CommandProfile, LpvPiConfig,
    PiController, PiGains, WeightOptConfig, WeightOptResult,
};
use crate::datakit::{
    add_noise, correct, prepare_regression, test_commands, training_commands, Dataset,
    NormalizationSpec,
};
use crate::error::{Error, Result};
use crate::koopman::{
    fit_eigenfunction, fit_modes_spatial, lpv_decompose, nonlinear_sampling, optimize_eigenvalues,
    EigFitConfig, EigOptConfig, EigenvalueSet, FitTarget, KemBlock, KoopmanModel, ModeBlock,
    SamplingKind, SpectrumMode,
};
use crate::numerics::{GaConfig, SwarmConfig};
use crate::plant::{isa_inlet, Plant, PlantConfig};
use crate::sindy::{sindy_fit, validate_predict, FitConfig, SindyModel, ValidationReport};
use serde::{Deserialize, Serialize};

/// Full pipeline configuration (the CLI configuration document).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub seed: u64,
    pub dt: f64,
    pub plant: PlantConfig,
    pub data: DataConfig,
    pub sindy: SindyStageConfig,
    pub koopman: KoopmanStageConfig,
    pub control: ControlStageConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DataConfig {
    pub noise_sigma_rpm: f64,
    pub filter_window: usize,
    pub filter_order: usize,
    /// Held-out validation window of the training set, s.
    pub holdout: (f64, f64),
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            noise_sigma_rpm: 50.0,
            filter_window: 51,
            filter_order: 3,
            holdout: (1390.0, 1490.0),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SindyStageConfig {
    pub max_iters: usize,
    pub polish_iters: usize,
    pub threshold: f64,
    pub l1_rounds: Vec<f64>,
}

impl Default for SindyStageConfig {
    fn default() -> Self {
        let d = FitConfig::default();
        SindyStageConfig {
            max_iters: d.max_iters,
            polish_iters: d.polish_iters,
            threshold: d.threshold,
            l1_rounds: d.l1_rounds,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct KoopmanStageConfig {
    /// Model order (state count; complex spectra use order/2 pairs).
    pub order: usize,
    pub spectrum: SpectrumMode,
    pub swarm_population: usize,
    pub swarm_iters: usize,
    /// Autonomous-trajectory generation.
    pub n_trajectories: usize,
    pub t_max: f64,
    /// Eigenfunction regression.
    pub kpde_samples: usize,
    pub sampling_strength: f64,
    pub n_lf: usize,
    pub eig_iters: usize,
    pub lm_iters: usize,
    /// Affine-LPV input decomposition order (0 disables).
    pub lpv_m: usize,
    pub alpha_c: f64,
}

impl Default for KoopmanStageConfig {
    fn default() -> Self {
        KoopmanStageConfig {
            order: 6,
            spectrum: SpectrumMode::Complex,
            swarm_population: 200,
            swarm_iters: 250,
            n_trajectories: 10,
            t_max: 15.0,
            kpde_samples: 500,
            sampling_strength: 5.0,
            n_lf: 10,
            eig_iters: 400,
            lm_iters: 80,
            lpv_m: 8,
            alpha_c: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ControlStageConfig {
    pub pi_gains: (f64, f64),
    pub imc_tau_f: f64,
    pub lpv_grid_points: usize,
    pub lqi_grid_points: usize,
    pub ga_population: usize,
    pub ga_generations: usize,
    pub imc_deriv_window: usize,
    pub imc_deriv_order: usize,
    pub imc_tau_meas: f64,
}

impl Default for ControlStageConfig {
    fn default() -> Self {
        ControlStageConfig {
            pi_gains: (1.0, 3.0),
            imc_tau_f: 0.05,
            lpv_grid_points: 11,
            lqi_grid_points: 21,
            ga_population: 48,
            ga_generations: 40,
            imc_deriv_window: 11,
            imc_deriv_order: 2,
            imc_tau_meas: 0.03,
        }
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 42,
            dt: 0.01,
            plant: PlantConfig::default(),
            data: DataConfig::default(),
            sindy: SindyStageConfig::default(),
            koopman: KoopmanStageConfig::default(),
            control: ControlStageConfig::default(),
        }
    }
}

/// Raw channels of one data-generation run plus the thrust channel.
pub struct SimulatedRun {
    pub dataset: Dataset,
    /// Normalized corrected thrust aligned with the dataset grid.
    pub thrust_cn: Vec<f64>,
}

/// Closed-loop data generation: a plain PI governor tracks the
/// excitation profile at sea-level static; sensor noise is superimposed
/// on the recorded spool speed afterwards.
pub fn simulate_run(
    plant: &Plant,
    commands: &[f64],
    segments: &[u8],
    dt: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<SimulatedRun> {
    let amb = isa_inlet(0.0, 0.0)?;
    let norm = NormalizationSpec::default();
    let n_phys0 = norm.denormalize_n(commands[0]);
    let mut state = plant.steady_state(n_phys0, &amb)?;
    let mut pi = PiController::new(PiGains { kp: 1.0, ki: 3.0 });
    {
        let (_, wf_corr) = correct(state.n_rpm, state.w_f, &amb);
        pi.preset_output(norm.normalize_w(wf_corr));
    }
    let steps = commands.len();
    let mut t = Vec::with_capacity(steps);
    let mut n_corr_series = Vec::with_capacity(steps);
    let mut wf_corr_series = Vec::with_capacity(steps);
    let mut thrust_cn = Vec::with_capacity(steps);
    let mut clamped_prev = false;
    let theta_delta = amb.theta_factor() * amb.delta_factor();
    for (k, &cmd) in commands.iter().enumerate() {
        let (n_corr, wf_corr) = correct(state.n_rpm, state.w_f, &amb);
        t.push(k as f64 * dt);
        n_corr_series.push(n_corr);
        wf_corr_series.push(wf_corr);
        let e = cmd - norm.normalize_n(n_corr);
        let v_norm = pi.step(e, dt, clamped_prev);
        let v_phys = norm.denormalize_w(v_norm) / theta_delta;
        let (next, out) = plant.clm_step(&state, v_phys, &amb, dt)?;
        thrust_cn.push(out.thrust * (crate::plant::P_STD / amb.p1t) / plant.f_dp);
        clamped_prev = out.clamped;
        state = next;
    }
    let noisy = add_noise(&n_corr_series, noise_sigma, seed);
    let dataset = prepare_regression(
        t,
        noisy,
        wf_corr_series,
        segments.to_vec(),
        noise_sigma,
        seed,
    )?;
    Ok(SimulatedRun { dataset, thrust_cn })
}

/// Training dataset: the three 500 s excitation segments.
pub fn simulate_training(plant: &Plant, cfg: &PipelineConfig) -> Result<SimulatedRun> {
    let (cmd, seg) = training_commands(cfg.dt, cfg.seed);
    simulate_run(
        plant,
        &cmd,
        &seg,
        cfg.dt,
        cfg.data.noise_sigma_rpm,
        cfg.seed.wrapping_add(1),
    )
}

/// Test dataset: the faster 500 s profile.
pub fn simulate_test(plant: &Plant, cfg: &PipelineConfig) -> Result<SimulatedRun> {
    let (cmd, seg) = test_commands(cfg.dt, cfg.seed.wrapping_add(100));
    simulate_run(
        plant,
        &cmd,
        &seg,
        cfg.dt,
        cfg.data.noise_sigma_rpm,
        cfg.seed.wrapping_add(101),
    )
}

/// Identify the governing equation on the training set with the
/// configured held-out validation window.
pub fn identify(train: &Dataset, cfg: &PipelineConfig) -> Result<(SindyModel, ValidationReport)> {
    let (h0, h1) = cfg.data.holdout;
    let fit_ds = train.without_window(h0, h1);
    let val_ds = train.window(h0, h1);
    let mut fc = FitConfig::default();
    fc.max_iters = cfg.sindy.max_iters;
    fc.polish_iters = cfg.sindy.polish_iters;
    fc.threshold = cfg.sindy.threshold;
    fc.l1_rounds = cfg.sindy.l1_rounds.clone();
    let model = sindy_fit(&fit_ds, &val_ds, &fc)?;
    let report = validate_predict(&model, &val_ds)?;
    Ok((model, report))
}

/// Spectral construction: autonomous trajectories, eigenvalue swarm
/// optimization, eigenfunction regression per retained block, mode
/// projection and optional affine-LPV input decomposition.
pub fn build_kem(
    sindy: &SindyModel,
    cfg: &PipelineConfig,
) -> Result<(KoopmanModel, EigenvalueSet)> {
    let kc = &cfg.koopman;
    let ics: Vec<f64> = (1..=kc.n_trajectories)
        .map(|i| 0.1 + 0.9 * i as f64 / kc.n_trajectories as f64)
        .collect();
    let traj = sindy.gen_autonomous(&ics, cfg.dt, kc.t_max)?;
    let t_grid: Vec<f64> = (0..traj.ncols()).map(|k| k as f64 * cfg.dt).collect();
    let swarm = SwarmConfig::new(kc.swarm_population, vec![], kc.swarm_iters, cfg.seed ^ 0xeec5);
    let eig_set = optimize_eigenvalues(
        &traj,
        &t_grid,
        kc.order,
        kc.spectrum,
        &swarm,
        &EigOptConfig::default(),
    )?;

    let samples = nonlinear_sampling(kc.kpde_samples, SamplingKind::Exponential, kc.sampling_strength, 1.0)?;
    let f_of_n = |n: f64| sindy.f(n);
    let mut ef_cfg = EigFitConfig::default();
    ef_cfg.n_lf = kc.n_lf;
    ef_cfg.max_iters = kc.eig_iters;
    ef_cfg.lm_iters = kc.lm_iters;

    let mut blocks = Vec::new();
    for b in eig_set.blocks() {
        match b {
            ModeBlock::Real { lambda } => {
                let fit = fit_eigenfunction(FitTarget::Real { lambda }, f_of_n, &samples, &ef_cfg)?;
                blocks.push(KemBlock::Real { lambda, phi: fit.phi });
            }
            ModeBlock::RepeatedReal { lambda } => {
                let base =
                    fit_eigenfunction(FitTarget::Real { lambda }, f_of_n, &samples, &ef_cfg)?;
                let gen = fit_eigenfunction(
                    FitTarget::Generalized { lambda, partner: &base.phi },
                    f_of_n,
                    &samples,
                    &ef_cfg,
                )?;
                blocks.push(KemBlock::Repeated {
                    lambda,
                    phi_gen: gen.phi,
                    phi_true: base.phi,
                });
            }
            ModeBlock::Complex { alpha, beta } => {
                let fit =
                    fit_eigenfunction(FitTarget::Complex { alpha, beta }, f_of_n, &samples, &ef_cfg)?;
                blocks.push(KemBlock::Complex {
                    alpha,
                    beta,
                    phi_re: fit.phi,
                    phi_im: fit.phi_im.expect("complex fit returns both components"),
                });
            }
            ModeBlock::ComplexSecular { alpha, beta } => {
                let base =
                    fit_eigenfunction(FitTarget::Complex { alpha, beta }, f_of_n, &samples, &ef_cfg)?;
                let phi_re = base.phi.clone();
                let phi_im = base.phi_im.clone().expect("complex fit returns both components");
                let gen = fit_eigenfunction(
                    FitTarget::ComplexGeneralized {
                        alpha,
                        beta,
                        partner_re: &phi_re,
                        partner_im: &phi_im,
                    },
                    f_of_n,
                    &samples,
                    &ef_cfg,
                )?;
                blocks.push(KemBlock::ComplexSecular {
                    alpha,
                    beta,
                    phi_gen_re: gen.phi,
                    phi_gen_im: gen.phi_im.expect("complex fit returns both components"),
                    phi_re,
                    phi_im,
                });
            }
        }
    }

    let grid: Vec<f64> = (1..=200).map(|i| i as f64 / 200.0).collect();
    let mut c = fit_modes_spatial(&blocks, &grid, kc.alpha_c)?;

    // drop blocks whose every amplitude was pruned away (they cannot be
    // observed through the output and would break the observer design)
    let mut keep = Vec::new();
    let mut idx = 0;
    for b in &blocks {
        let states = b.states();
        let active = (idx..idx + states).any(|i| c[i] != 0.0);
        keep.push(active);
        idx += states;
    }
    if keep.iter().any(|k| !k) {
        let filtered: Vec<KemBlock> = blocks
            .iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(b, _)| b.clone())
            .collect();
        if filtered.is_empty() {
            return Err(Error::Infeasible("build_kem: every mode amplitude pruned".into()));
        }
        blocks = filtered;
        c = fit_modes_spatial(&blocks, &grid, kc.alpha_c)?;
    }

    let mut kem = KoopmanModel {
        blocks,
        c,
        g_terms: sindy.g_terms.clone(),
        lpv: None,
    };
    if kc.lpv_m > 0 {
        let sw = SwarmConfig::new(60, vec![], 120, cfg.seed ^ 0xa11e);
        let lpv = lpv_decompose(&kem, kc.lpv_m, &grid, &sw, 1e-8)?;
        kem.lpv = Some(lpv);
    }
    Ok((kem, eig_set))
}

/// Designed controllers plus the weight-optimization diagnostics.
pub struct DesignOutputs {
    pub set: ControllerSet,
    pub weights: WeightOptResult,
}

/// Design all four controllers. The Kalman observer comes from the noise
/// estimated on the test dataset; the LQI weights from the genetic
/// search on the canonical profile.
pub fn design_controllers(
    plant: &Plant,
    sindy: &SindyModel,
    kem: &KoopmanModel,
    test_ds: &Dataset,
    cfg: &PipelineConfig,
) -> Result<DesignOutputs> {
    let t_f = cfg.plant.constants.t_f;
    let norm = NormalizationSpec::default();

    let mut lpv_cfg = LpvPiConfig::default();
    lpv_cfg.grid_points = cfg.control.lpv_grid_points;
    lpv_cfg.t_f = t_f;
    let lpv = lpv_pi_design(sindy, &lpv_cfg)?;

    let noise = estimate_noise(kem, test_ds)?;
    let kalman = kalman_design(kem, &noise)?;

    let scenario = canonical_profile(cfg.dt);
    let profile = CommandProfile {
        dt: cfg.dt,
        nbar_d: scenario.command.clone(),
        w_e: scenario.w_e.clone(),
    };
    let mut wcfg = WeightOptConfig::default();
    wcfg.grid = (0..cfg.control.lqi_grid_points)
        .map(|i| i as f64 / (cfg.control.lqi_grid_points - 1) as f64)
        .collect();
    wcfg.t_f = t_f;
    wcfg.n_nominal_rpm = plant.design.n_dp;

    // limiter envelope in normalized corrected coordinates
    let limiter = plant.limiter.clone();
    let bounds = move |n: f64| {
        let n_corr = norm.denormalize_n(n);
        let (lo, hi) = limiter.bounds(n_corr);
        (norm.normalize_w(lo), norm.normalize_w(hi))
    };

    let amb = isa_inlet(0.0, 0.0)?;
    let n_phys0 = scenario.command[0] * plant.design.n_dp;
    let st0 = plant.steady_state(n_phys0, &amb)?;
    let (n_corr0, wf_corr0) = correct(st0.n_rpm, st0.w_f, &amb);
    let init = (norm.normalize_n(n_corr0), norm.normalize_w(wf_corr0));

    let mut ga = GaConfig::new(
        cfg.control.ga_population,
        cfg.control.ga_generations,
        vec![],
        cfg.seed ^ 0x6a,
    );
    ga.elite_count = 3;
    let weights = optimize_weights(kem, &kalman, &profile, &bounds, init, &ga, &wcfg)?;

    let set = ControllerSet {
        pi: PiGains { kp: cfg.control.pi_gains.0, ki: cfg.control.pi_gains.1 },
        lpv_pi: lpv,
        imc_tau_f: cfg.control.imc_tau_f,
        imc_deriv_window: cfg.control.imc_deriv_window,
        imc_deriv_order: cfg.control.imc_deriv_order,
        imc_tau_meas: cfg.control.imc_tau_meas,
        sindy: sindy.clone(),
        kem: kem.clone(),
        klqgi: weights.design.clone(),
        norm,
        t_f,
    };
    Ok(DesignOutputs { set, weights })
}

/// Tournament result bundle per scenario and controller.
pub struct Evaluation {
    pub scenario: Scenario,
    pub traces: Vec<(String, Trace)>,
    pub metrics: Vec<(String, Metrics)>,
}

pub const CONTROLLERS: [&str; 4] = ["pi", "lpv-pi", "imc", "klqgi"];

/// Run every controller on a scenario against the plant.
pub fn evaluate_scenario(
    plant: &Plant,
    set: &ControllerSet,
    scenario: &Scenario,
) -> Result<Evaluation> {
    let mut traces = Vec::new();
    let mut metrics = Vec::new();
    for kind in CONTROLLERS {
        let trace = run_tracking(plant, set, kind, scenario)?;
        if let Some(f) = &trace.failure {
            return Err(Error::convergence("evaluate_scenario", format!("{kind}: {f}")));
        }
        let m = compute_metrics(&trace, scenario, plant.design.n_dp)?;
        traces.push((kind.to_string(), trace));
        metrics.push((kind.to_string(), m));
    }
    Ok(Evaluation {
        scenario: scenario.clone(),
        traces,
        metrics,
    })
}

/// The three benchmark scenarios.
pub fn standard_scenarios(dt: f64) -> Vec<Scenario> {
    vec![
        canonical_profile(dt),
        varying_flight_scenario(dt),
        disturbance_scenario(dt),
    ]
}
