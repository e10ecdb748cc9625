//! Gradient-descent fitting of the control-affine model with sequential
//! thresholding.
//!
//! Each round runs full-batch descent with adaptive momentum on the
//! linear weights and the logistic shape parameters, a sparsity penalty
//! on the weights and a penalty pinning `f(0)` to zero. Between rounds,
//! small weights are thresholded away and degenerate logistic terms are
//! dropped or merged into the bias, then descent restarts with reduced
//! regularization.

use super::{LogisticTerm, ModelLineage, RoundLog, SindyModel, Term};
use crate::datakit::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{adam_step, AdamState};
use nalgebra::DVector;
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct FitConfig {
    /// Learning rates for the weights, steepness and center groups.
    pub lr_xi: f64,
    pub lr_eps: f64,
    pub lr_mu: f64,
    /// Sparsity weight per thresholding round.
    pub l1_rounds: Vec<f64>,
    /// Weight threshold of the sequential-thresholding rule.
    pub threshold: f64,
    /// Zero-at-origin penalty weight.
    pub k0: f64,
    /// Iteration cap per round.
    pub max_iters: usize,
    /// Validation cadence (iterations) and early-stop patience (checks).
    pub val_every: usize,
    pub patience: usize,
    /// Final fine-tune iterations after the last pruning pass.
    pub polish_iters: usize,
    /// Logistic terms per side in the initial library.
    pub n_lf: usize,
    pub init_eps: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            lr_xi: 0.01,
            lr_eps: 50.0,
            lr_mu: 0.01,
            l1_rounds: vec![1e-4, 1e-5],
            threshold: 0.005,
            k0: 10.0,
            max_iters: 800,
            val_every: 10,
            patience: 3,
            polish_iters: 200,
            n_lf: 5,
            init_eps: 10.0,
        }
    }
}

/// Initial 13-term library: five logistic functions plus the linear term
/// on the autonomous side; five logistic functions, the bilinear cross
/// term and the plain input term on the input side.
fn initial_library(cfg: &FitConfig) -> SindyModel {
    let lf_row = |sign: f64| -> Vec<Term> {
        (0..cfg.n_lf)
            .map(|i| {
                let frac = (i as f64 + 0.5) / cfg.n_lf as f64;
                Term::Logistic(LogisticTerm {
                    xi: 0.05 * if i % 2 == 0 { sign } else { -sign },
                    eps: cfg.init_eps,
                    mu: frac,
                })
            })
            .collect()
    };
    let mut f_terms = lf_row(-1.0);
    f_terms.push(Term::Linear { xi: 0.0 });
    let mut g_terms = lf_row(1.0);
    g_terms.push(Term::Linear { xi: 0.0 });
    g_terms.push(Term::Constant { xi: 0.2 });
    SindyModel {
        f_terms,
        g_terms,
        lineage: ModelLineage::default(),
    }
}

/// Flat gradient accumulator matching the three parameter groups.
#[derive(Clone)]
struct Grads {
    xi: Vec<f64>,
    eps: Vec<f64>,
    mu: Vec<f64>,
    sq_err: f64,
}

impl Grads {
    fn zeros(n_xi: usize, n_lf: usize) -> Grads {
        Grads {
            xi: vec![0.0; n_xi],
            eps: vec![0.0; n_lf],
            mu: vec![0.0; n_lf],
            sq_err: 0.0,
        }
    }

    fn add(mut self, other: &Grads) -> Grads {
        for (a, b) in self.xi.iter_mut().zip(&other.xi) {
            *a += b;
        }
        for (a, b) in self.eps.iter_mut().zip(&other.eps) {
            *a += b;
        }
        for (a, b) in self.mu.iter_mut().zip(&other.mu) {
            *a += b;
        }
        self.sq_err += other.sq_err;
        self
    }
}

struct Layout {
    n_f: usize,
    n_terms: usize,
    /// (term index within model side, is_f) per logistic slot.
    logistic_slots: Vec<(usize, bool)>,
}

fn layout(model: &SindyModel) -> Layout {
    let mut slots = Vec::new();
    for (i, t) in model.f_terms.iter().enumerate() {
        if matches!(t, Term::Logistic(_)) {
            slots.push((i, true));
        }
    }
    for (i, t) in model.g_terms.iter().enumerate() {
        if matches!(t, Term::Logistic(_)) {
            slots.push((i, false));
        }
    }
    Layout {
        n_f: model.f_terms.len(),
        n_terms: model.f_terms.len() + model.g_terms.len(),
        logistic_slots: slots,
    }
}

/// Mean-squared residual gradient over the dataset, accumulated in
/// parallel over fixed-size chunks (deterministic reduction order).
fn batch_grads(model: &SindyModel, lay: &Layout, x: &[f64], u: &[f64], y: &[f64]) -> Grads {
    let n = x.len();
    let chunk = 8192;
    let n_chunks = n.div_ceil(chunk);
    let partials: Vec<Grads> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * chunk;
            let hi = ((c + 1) * chunk).min(n);
            let mut g = Grads::zeros(lay.n_terms, lay.logistic_slots.len());
            for t in lo..hi {
                let (xv, uv, yv) = (x[t], u[t], y[t]);
                let r = model.f(xv) + model.g(xv) * uv - yv;
                g.sq_err += r * r;
                let two_r = 2.0 * r;
                for (i, term) in model.f_terms.iter().enumerate() {
                    g.xi[i] += two_r * term.basis(xv);
                }
                for (j, term) in model.g_terms.iter().enumerate() {
                    g.xi[lay.n_f + j] += two_r * term.basis(xv) * uv;
                }
                for (slot, &(idx, is_f)) in lay.logistic_slots.iter().enumerate() {
                    let (term, scale) = if is_f {
                        (&model.f_terms[idx], 1.0)
                    } else {
                        (&model.g_terms[idx], uv)
                    };
                    if let Term::Logistic(l) = term {
                        let lf = l.lf(xv);
                        let core = lf * (1.0 - lf);
                        g.eps[slot] += two_r * scale * l.xi * core * (xv - l.mu);
                        g.mu[slot] += two_r * scale * l.xi * (-l.eps) * core;
                    }
                }
            }
            g
        })
        .collect();
    let mut total = Grads::zeros(lay.n_terms, lay.logistic_slots.len());
    for p in &partials {
        total = total.add(p);
    }
    let inv = 1.0 / n as f64;
    total.xi.iter_mut().for_each(|v| *v *= inv);
    total.eps.iter_mut().for_each(|v| *v *= inv);
    total.mu.iter_mut().for_each(|v| *v *= inv);
    total.sq_err *= inv;
    total
}

/// Add the sparsity and zero-at-origin penalty gradients; returns the
/// full loss.
fn penalties(model: &SindyModel, lay: &Layout, grads: &mut Grads, alpha: f64, k0: f64) -> f64 {
    let mut l1 = 0.0;
    for (i, t) in model.f_terms.iter().chain(model.g_terms.iter()).enumerate() {
        l1 += t.xi().abs();
        grads.xi[i] += alpha * t.xi().signum();
    }
    let f0 = model.f(0.0);
    let s = f0.signum();
    for (i, t) in model.f_terms.iter().enumerate() {
        grads.xi[i] += k0 * s * t.basis(0.0);
    }
    for (slot, &(idx, is_f)) in lay.logistic_slots.iter().enumerate() {
        if !is_f {
            continue;
        }
        if let Term::Logistic(l) = &model.f_terms[idx] {
            let lf = l.lf(0.0);
            let core = lf * (1.0 - lf);
            grads.eps[slot] += k0 * s * l.xi * core * (0.0 - l.mu);
            grads.mu[slot] += k0 * s * l.xi * (-l.eps) * core;
        }
    }
    grads.sq_err + alpha * l1 + k0 * f0.abs()
}

/// Full loss and analytic gradient (exposed for the gradient-check
/// property test).
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn loss_and_grads(
    model: &SindyModel,
    x: &[f64],
    u: &[f64],
    y: &[f64],
    alpha: f64,
    k0: f64,
) -> (f64, Vec<f64>, Vec<f64>, Vec<f64>) {
    let lay = layout(model);
    let mut g = batch_grads(model, &lay, x, u, y);
    let loss = penalties(model, &lay, &mut g, alpha, k0);
    (loss, g.xi, g.eps, g.mu)
}

fn apply_updates(model: &mut SindyModel, lay: &Layout, xi: &[f64], eps: &[f64], mu: &[f64]) {
    for (i, t) in model
        .f_terms
        .iter_mut()
        .chain(model.g_terms.iter_mut())
        .enumerate()
    {
        *t.xi_mut() = xi[i];
    }
    for (slot, &(idx, is_f)) in lay.logistic_slots.iter().enumerate() {
        let term = if is_f {
            &mut model.f_terms[idx]
        } else {
            &mut model.g_terms[idx]
        };
        if let Term::Logistic(l) = term {
            l.eps = eps[slot].clamp(-200.0, 200.0);
            l.mu = mu[slot].clamp(-5.0, 6.0);
        }
    }
}

fn collect_params(model: &SindyModel, lay: &Layout) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let xi: Vec<f64> = model
        .f_terms
        .iter()
        .chain(model.g_terms.iter())
        .map(|t| t.xi())
        .collect();
    let mut eps = Vec::with_capacity(lay.logistic_slots.len());
    let mut mu = Vec::with_capacity(lay.logistic_slots.len());
    for &(idx, is_f) in &lay.logistic_slots {
        let term = if is_f { &model.f_terms[idx] } else { &model.g_terms[idx] };
        if let Term::Logistic(l) = term {
            eps.push(l.eps);
            mu.push(l.mu);
        }
    }
    (xi, eps, mu)
}

/// Sequential thresholding plus the logistic degeneracy rules: weights at
/// or below the threshold go, centered-out logistic terms become zero or
/// merge into the bias.
fn prune(model: &mut SindyModel, threshold: f64) {
    let prune_side = |terms: &mut Vec<Term>| {
        let mut const_acc = 0.0;
        let mut kept = Vec::with_capacity(terms.len());
        for t in terms.drain(..) {
            if t.xi().abs() <= threshold {
                continue;
            }
            match t {
                Term::Logistic(l) => {
                    let to_one = (l.mu < -3.0 && l.eps > 0.0) || (l.mu > 4.0 && l.eps < 0.0);
                    let to_zero = (l.mu > 4.0 && l.eps > 0.0) || (l.mu < -3.0 && l.eps < 0.0);
                    if l.eps.abs() < 1e-3 {
                        const_acc += 0.5 * l.xi;
                    } else if to_one {
                        const_acc += l.xi;
                    } else if to_zero {
                        // effectively excluded
                    } else {
                        kept.push(Term::Logistic(l));
                    }
                }
                other => kept.push(other),
            }
        }
        if const_acc != 0.0 {
            let mut merged = false;
            for t in kept.iter_mut() {
                if let Term::Constant { xi } = t {
                    *xi += const_acc;
                    merged = true;
                    break;
                }
            }
            if !merged {
                kept.push(Term::Constant { xi: const_acc });
            }
        }
        *terms = kept;
    };
    prune_side(&mut model.f_terms);
    prune_side(&mut model.g_terms);
}

/// Integrate the model over a dataset's recorded fuel input; `None` when
/// the trajectory diverges.
fn simulate_norm(model: &SindyModel, ds: &Dataset) -> Option<Vec<f64>> {
    let dt = ds.dt();
    let mut n = ds.n_norm[0];
    let mut out = Vec::with_capacity(ds.len());
    out.push(n);
    for k in 1..ds.len() {
        let u = ds.wf_norm[k - 1];
        let k1 = model.eval(n, u);
        let k2 = model.eval(n + 0.5 * dt * k1, u);
        let k3 = model.eval(n + 0.5 * dt * k2, u);
        let k4 = model.eval(n + dt * k3, u);
        n += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !n.is_finite() || n.abs() > 10.0 {
            return None;
        }
        out.push(n);
    }
    Some(out)
}

/// Prediction quality of a fitted model over a dataset.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub trajectory: Vec<f64>,
    /// Mean absolute error of the de-normalized corrected speed, RPM.
    pub mae_rpm: f64,
    /// Mean absolute percentage error, percent.
    pub mape: f64,
}

/// Integrate the model with the dataset's input and score it against the
/// filtered measurement on de-normalized corrected spool speed.
pub fn validate_predict(model: &SindyModel, ds: &Dataset) -> Result<ValidationReport> {
    let traj = simulate_norm(model, ds)
        .ok_or_else(|| Error::convergence("validate_predict", "model trajectory diverged"))?;
    let s_n = ds.lineage.normalization.s_n;
    let o_n = ds.lineage.normalization.o_n;
    let mut abs = 0.0;
    let mut pct = 0.0;
    for k in 0..ds.len() {
        let err_rpm = s_n * (traj[k] - ds.n_norm[k]);
        abs += err_rpm.abs();
        let denom = ds.n_norm[k] * s_n + o_n;
        pct += (err_rpm / denom).abs();
    }
    let count = ds.len() as f64;
    Ok(ValidationReport {
        trajectory: traj,
        mae_rpm: abs / count,
        mape: 100.0 * pct / count,
    })
}

fn validation_mae(model: &SindyModel, val: &Dataset) -> f64 {
    match simulate_norm(model, val) {
        Some(traj) => {
            let s_n = val.lineage.normalization.s_n;
            let mut abs = 0.0;
            for k in 0..val.len() {
                abs += (s_n * (traj[k] - val.n_norm[k])).abs();
            }
            abs / val.len() as f64
        }
        None => f64::INFINITY,
    }
}

/// Iteration log of one descent round.
#[derive(Debug, Clone)]
pub struct FitLog {
    pub rounds: Vec<RoundLog>,
}

/// Exact ridge solve for the linear weights at fixed logistic shapes,
/// with a weighted row pinning `f(0)` toward zero. Warm-starts each
/// descent round at the MSE optimum of the current basis.
fn warm_start_weights(model: &mut SindyModel, train: &Dataset, alpha: f64) -> Result<()> {
    use crate::numerics::ridge_solve;
    let t_len = train.len();
    let n_f = model.f_terms.len();
    let n_terms = n_f + model.g_terms.len();
    let w0 = 5.0 * (t_len as f64).sqrt();
    let mut e = nalgebra::DMatrix::zeros(n_terms, t_len + 1);
    let mut y = nalgebra::DMatrix::zeros(1, t_len + 1);
    for t in 0..t_len {
        let (x, u) = (train.n_norm[t], train.wf_norm[t]);
        for (i, term) in model.f_terms.iter().enumerate() {
            e[(i, t)] = term.basis(x);
        }
        for (j, term) in model.g_terms.iter().enumerate() {
            e[(n_f + j, t)] = term.basis(x) * u;
        }
        y[(0, t)] = train.dn_dt[t];
    }
    for (i, term) in model.f_terms.iter().enumerate() {
        e[(i, t_len)] = w0 * term.basis(0.0);
    }
    let k = ridge_solve(&e, &y, alpha.max(1e-9) * t_len as f64)?;
    for (i, t) in model
        .f_terms
        .iter_mut()
        .chain(model.g_terms.iter_mut())
        .enumerate()
    {
        *t.xi_mut() = k[(0, i)];
    }
    Ok(())
}

fn descend_round(
    mut model: SindyModel,
    train: &Dataset,
    val: &Dataset,
    cfg: &FitConfig,
    alpha: f64,
    max_iters: usize,
) -> Result<(SindyModel, RoundLog)> {
    warm_start_weights(&mut model, train, alpha)?;
    let lay = layout(&model);
    let (xi0, eps0, mu0) = collect_params(&model, &lay);
    let mut xi = DVector::from_vec(xi0);
    let mut eps = DVector::from_vec(eps0);
    let mut mu = DVector::from_vec(mu0);
    let mut st_xi = AdamState::new(xi.len(), cfg.lr_xi);
    let mut st_eps = AdamState::new(eps.len(), cfg.lr_eps);
    let mut st_mu = AdamState::new(mu.len(), cfg.lr_mu);

    let mut best = model.clone();
    let mut best_mae = validation_mae(&model, val);
    let mut bad_checks = 0;
    let mut last_loss = f64::INFINITY;
    let mut iters_done = 0;

    for it in 0..max_iters {
        let mut grads = batch_grads(&model, &lay, &train.n_norm, &train.wf_norm, &train.dn_dt);
        let loss = penalties(&model, &lay, &mut grads, alpha, cfg.k0);
        if !loss.is_finite() {
            return Err(Error::convergence(
                "sindy_fit",
                format!("divergent loss at iteration {it} (alpha = {alpha})"),
            ));
        }
        last_loss = loss;
        let (nxi, s1) = adam_step(&xi, &DVector::from_vec(grads.xi), &st_xi)?;
        let (neps, s2) = adam_step(&eps, &DVector::from_vec(grads.eps), &st_eps)?;
        let (nmu, s3) = adam_step(&mu, &DVector::from_vec(grads.mu), &st_mu)?;
        xi = nxi;
        eps = neps;
        mu = nmu;
        st_xi = s1;
        st_eps = s2;
        st_mu = s3;
        apply_updates(&mut model, &lay, xi.as_slice(), eps.as_slice(), mu.as_slice());
        iters_done = it + 1;

        if (it + 1) % cfg.val_every == 0 {
            let mae = validation_mae(&model, val);
            if mae < best_mae {
                best_mae = mae;
                best = model.clone();
            }
            // growth check with a small tolerance band so descent noise
            // around the optimum does not end the round prematurely
            if mae > best_mae * 1.01 {
                bad_checks += 1;
                if bad_checks >= cfg.patience {
                    break;
                }
            } else {
                bad_checks = 0;
            }
        }
    }
    let log = RoundLog {
        l1_weight: alpha,
        iterations: iters_done,
        final_loss: last_loss,
        best_validation_mae_rpm: best_mae,
        active_terms: best.active_terms(),
    };
    Ok((best, log))
}

/// Fit the control-affine model. `train` drives the regression, `val` is
/// a held-out window used for the early-stopping checks.
pub fn sindy_fit(train: &Dataset, val: &Dataset, cfg: &FitConfig) -> Result<SindyModel> {
    if train.dn_dt.is_empty() {
        return Err(Error::invalid("sindy_fit: empty training dataset"));
    }
    let mut model = initial_library(cfg);
    let mut rounds = Vec::new();
    for (round, &alpha) in cfg.l1_rounds.iter().enumerate() {
        let (m, log) = descend_round(model, train, val, cfg, alpha, cfg.max_iters)?;
        model = m;
        rounds.push(log);
        prune(&mut model, cfg.threshold);
        if model.f_terms.is_empty() || model.g_terms.is_empty() {
            return Err(Error::Infeasible(format!(
                "sindy_fit: all terms pruned after round {round}"
            )));
        }
    }
    // fine-tune the surviving terms after the last pruning pass
    let alpha_last = *cfg.l1_rounds.last().unwrap_or(&1e-5);
    let (m, log) = descend_round(model, train, val, cfg, alpha_last, cfg.polish_iters)?;
    model = m;
    rounds.push(log);
    model.lineage = ModelLineage {
        l1_weights: cfg.l1_rounds.clone(),
        threshold: cfg.threshold,
        zero_penalty: cfg.k0,
        rounds,
    };
    Ok(model)
}
