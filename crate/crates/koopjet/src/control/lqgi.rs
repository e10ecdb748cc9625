//! Koopman LQG-with-integrator synthesis: fuel-lag and integral
//! augmentation, gain scheduling over the operating range via the
//! continuous Riccati equation, the steady Kalman observer, and the
//! runtime control law.

use super::schedule::CubicSpline;
use crate::datakit::Dataset;
use crate::error::{Error, Result};
use crate::koopman::KoopmanModel;
use crate::numerics::{solve_care, CareProblem};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Fuel-lag augmented system at one operating point:
/// `A_i = [[Lambda, G(N_i)], [0, -1/T_f]]`, `B_i = [0; 1/T_f]`,
/// `C_i = [C, 0]`, then the integral row `-C_i` closes the tracking
/// augmentation.
pub fn augment_system(
    kem: &KoopmanModel,
    n_i: f64,
    t_f: f64,
) -> (DMatrix<f64>, DVector<f64>, DVector<f64>) {
    let n = kem.dim();
    let lam = kem.lambda_matrix();
    let g = kem.input_map(n_i);
    let dim = n + 2;
    let mut a = DMatrix::zeros(dim, dim);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = lam[(i, j)];
        }
        a[(i, n)] = g[i];
    }
    a[(n, n)] = -1.0 / t_f;
    // integral row: eta_dot = -C_i zeta (+ demand feedthrough)
    for j in 0..n {
        a[(n + 1, j)] = -kem.c[j];
    }
    let mut b = DVector::zeros(dim);
    b[n] = 1.0 / t_f;
    let mut c = DVector::zeros(dim);
    for j in 0..n {
        c[j] = kem.c[j];
    }
    (a, b, c)
}

/// Gain schedule: one feedback row per grid point, interpolated entrywise
/// by cubic splines.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KlqiSchedule {
    pub grid: Vec<f64>,
    /// Feedback rows (length dim+2) per grid point.
    pub gains: Vec<DVector<f64>>,
    splines: Vec<CubicSpline>,
}

impl KlqiSchedule {
    pub fn gain_at(&self, n: f64) -> DVector<f64> {
        DVector::from_fn(self.splines.len(), |i, _| self.splines[i].eval(n))
    }

    pub fn dim(&self) -> usize {
        self.splines.len()
    }
}

/// Solve the regulator Riccati equation at every grid point and build
/// the interpolated schedule. Fails naming the first offending point.
pub fn lqi_design(
    kem: &KoopmanModel,
    q_z: &DMatrix<f64>,
    r_c: f64,
    grid: &[f64],
    t_f: f64,
) -> Result<KlqiSchedule> {
    if grid.len() < 4 {
        return Err(Error::invalid("lqi_design: need at least 4 grid points"));
    }
    let dim = kem.dim() + 2;
    if q_z.shape() != (dim, dim) {
        return Err(Error::invalid(format!(
            "lqi_design: Q_z must be {dim}x{dim}"
        )));
    }
    let r = DMatrix::from_element(1, 1, r_c);
    let mut gains = Vec::with_capacity(grid.len());
    for &n_i in grid {
        let (a, b, _) = augment_system(kem, n_i, t_f);
        let prob = CareProblem::new(a.clone(), DMatrix::from_column_slice(dim, 1, b.as_slice()), q_z.clone(), r.clone())
            .map_err(|e| Error::Infeasible(format!("lqi_design at N = {n_i:.3}: {e}")))?;
        let p = solve_care(&prob)
            .map_err(|e| Error::Infeasible(format!("lqi_design at N = {n_i:.3}: {e}")))?;
        // K = R^-1 B^T P
        let k = (b.transpose() * &p) / r_c;
        gains.push(DVector::from_fn(dim, |i, _| k[(0, i)]));
    }
    let splines = (0..dim)
        .map(|i| {
            CubicSpline::new(grid.to_vec(), gains.iter().map(|g| g[i]).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KlqiSchedule { grid: grid.to_vec(), gains, splines })
}

/// Process/measurement noise model for the observer design.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObserverNoise {
    pub q_o: DMatrix<f64>,
    pub r_o: f64,
    pub g_o: DMatrix<f64>,
}

/// Estimate the noise model from a dataset: the process covariance from
/// the eigenfunction-dynamics residuals on the ground-truth channel, the
/// measurement variance from the steadiest raw-signal window.
pub fn estimate_noise(kem: &KoopmanModel, ds: &Dataset) -> Result<ObserverNoise> {
    let n = kem.dim();
    if ds.len() < 600 {
        return Err(Error::invalid("estimate_noise: dataset too short"));
    }
    // process noise: covariance of  dPhi/dN * dN/dt - Lambda Phi - G(N) u
    let mut residuals: Vec<DVector<f64>> = Vec::with_capacity(ds.len());
    let mut mean = DVector::zeros(n);
    for k in 0..ds.len() {
        let x = ds.n_norm[k];
        let u = ds.wf_norm[k];
        let phi = kem.phi(x);
        let v = kem.phi_dx(x) * ds.dn_dt[k] - kem.lambda_apply(&phi) - kem.input_map(x) * u;
        mean += &v;
        residuals.push(v);
    }
    mean /= ds.len() as f64;
    let mut q_o = DMatrix::zeros(n, n);
    for v in &residuals {
        let d = v - &mean;
        q_o += &d * d.transpose();
    }
    q_o /= (ds.len() - 1) as f64;
    // symmetrize against accumulation round-off
    q_o = (&q_o + q_o.transpose()) * 0.5;

    // measurement noise: variance of the normalized raw signal over the
    // steadiest 500-sample window
    let win = 500.min(ds.len() / 2);
    let mut best_start = 0;
    let mut best_activity = f64::INFINITY;
    let stride = win / 2;
    let mut start = 0;
    while start + win <= ds.len() {
        let activity: f64 = ds.dn_dt[start..start + win].iter().map(|v| v.abs()).sum();
        if activity < best_activity {
            best_activity = activity;
            best_start = start;
        }
        start += stride;
    }
    let s_n = ds.lineage.normalization.s_n;
    let raw: Vec<f64> = ds.n_raw[best_start..best_start + win]
        .iter()
        .map(|v| (v - ds.lineage.normalization.o_n) / s_n)
        .collect();
    let m = raw.iter().sum::<f64>() / raw.len() as f64;
    let r_o = raw.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (raw.len() - 1) as f64;
    Ok(ObserverNoise {
        q_o,
        r_o: r_o.max(1e-12),
        g_o: DMatrix::identity(n, n),
    })
}

/// Steady Kalman gain from the observer Riccati equation
/// `Lambda P + P Lambda^T + G_o Q_o G_o^T - P C^T R_o^-1 C P = 0`,
/// `L = P C^T R_o^-1`.
pub fn kalman_design(kem: &KoopmanModel, noise: &ObserverNoise) -> Result<DVector<f64>> {
    let n = kem.dim();
    let lam = kem.lambda_matrix();
    let c_row = DMatrix::from_fn(1, n, |_, j| kem.c[j]);
    // observability check on (Lambda, C)
    let mut obs = DMatrix::zeros(n, n);
    let mut row = c_row.clone();
    for i in 0..n {
        obs.set_row(i, &row.row(0));
        row = &row * &lam;
    }
    if obs.rank(1e-10) < n {
        return Err(Error::Infeasible(
            "kalman_design: (Lambda, C) pair not observable".into(),
        ));
    }
    // dual Riccati: A -> Lambda^T, B -> C^T
    let q = &noise.g_o * &noise.q_o * noise.g_o.transpose();
    let q = (&q + q.transpose()) * 0.5;
    let prob = CareProblem::new(
        lam.transpose(),
        c_row.transpose(),
        q,
        DMatrix::from_element(1, 1, noise.r_o),
    )?;
    let p = solve_care(&prob)?;
    Ok((&p * c_row.transpose() / noise.r_o).column(0).into_owned())
}

/// Designed controller bundle ready for execution or serialization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LqgiDesign {
    pub schedule: KlqiSchedule,
    pub kalman_gain: DVector<f64>,
    pub q_z: DMatrix<f64>,
    pub r_c: f64,
    pub t_f: f64,
}

/// Runtime Koopman LQGI controller: gains and the input map evaluate at
/// the Kalman estimate, the tracking integral uses the measured speed,
/// and the integral freezes while the limiter clamps. State propagation
/// happens at the next call using the command the limiter actually let
/// through.
#[derive(Debug, Clone)]
pub struct LqgiController {
    pub design: LqgiDesign,
    kem: KoopmanModel,
    phi_hat: DVector<f64>,
    wf_hat: f64,
    eta: f64,
    /// Observer integration substeps per control period.
    n_sub: usize,
    /// (measured speed, demand, issued command) of the previous period.
    pending: Option<(f64, f64, f64)>,
}

impl LqgiController {
    pub fn new(design: LqgiDesign, kem: KoopmanModel, dt: f64) -> LqgiController {
        let n = kem.dim();
        let lam = kem.lambda_matrix();
        let c_row = DMatrix::from_fn(1, n, |_, j| kem.c[j]);
        let a_obs = &lam - &design.kalman_gain * c_row;
        let rho = a_obs
            .complex_eigenvalues()
            .iter()
            .map(|l| l.norm())
            .fold(0.0, f64::max);
        let n_sub = ((dt * rho / 0.2).ceil() as usize).clamp(1, 100);
        LqgiController {
            design,
            kem,
            phi_hat: DVector::zeros(n),
            wf_hat: 0.0,
            eta: 0.0,
            n_sub,
            pending: None,
        }
    }

    /// Initialize the estimate at an equilibrium point.
    pub fn reset_to(&mut self, n_norm: f64, wf_norm: f64) {
        self.phi_hat = self.kem.phi(n_norm);
        self.wf_hat = wf_norm;
        self.pending = None;
        // start the integral where the feedback law holds the point
        let k = self.design.schedule.gain_at(n_norm);
        let dim = self.phi_hat.len();
        let mut v_state = 0.0;
        for i in 0..dim {
            v_state += k[i] * self.phi_hat[i];
        }
        v_state += k[dim] * self.wf_hat;
        let k_i = k[dim + 1];
        self.eta = if k_i.abs() > 1e-12 {
            (-wf_norm - v_state) / k_i
        } else {
            0.0
        };
    }

    pub fn estimate(&self) -> (DVector<f64>, f64) {
        (self.phi_hat.clone(), self.kem.output(&self.phi_hat))
    }

    /// One control period: finish the previous period's state update
    /// using the command the limiter let through, then compute the new
    /// command from the current estimate. The tracking integral uses the
    /// measured speed and freezes over clamped periods.
    pub fn step(
        &mut self,
        n_meas: f64,
        n_demand: f64,
        dt: f64,
        clamped_prev: bool,
        applied_prev: Option<f64>,
    ) -> f64 {
        if let Some((pm, pd, issued)) = self.pending.take() {
            let realized = applied_prev.unwrap_or(issued);
            if !clamped_prev {
                self.eta += dt * (pd - pm);
            }
            let l = &self.design.kalman_gain;
            let h = dt / self.n_sub as f64;
            for _ in 0..self.n_sub {
                let n_est = self.kem.output(&self.phi_hat);
                let innov = pm - n_est;
                let d_phi = self.kem.lambda_apply(&self.phi_hat)
                    + self.kem.input_map_eval(n_est, false) * self.wf_hat
                    + l * innov;
                self.phi_hat += d_phi * h;
            }
            // fuel state follows the first-order model exactly (no Kalman
            // correction on the fuel channel)
            self.wf_hat =
                (1.0 - dt / self.design.t_f) * self.wf_hat + dt / self.design.t_f * realized;
        }

        let n_hat = self.kem.output(&self.phi_hat);
        let k = self.design.schedule.gain_at(n_hat);
        let dim = self.phi_hat.len();
        let mut v = 0.0;
        for i in 0..dim {
            v -= k[i] * self.phi_hat[i];
        }
        v -= k[dim] * self.wf_hat;
        v -= k[dim + 1] * self.eta;
        self.pending = Some((n_meas, n_demand, v));
        v
    }
}
