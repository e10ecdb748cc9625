//! Control-affine governing-equation identification:
//! `dN/dt = f(N) + g(N) Wf` with adaptive logistic bases, sparse
//! regression and the zero-at-origin constraint on the autonomous part.

mod fit;

pub use fit::{sindy_fit, validate_predict, FitConfig, FitLog, ValidationReport};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Logistic basis function `1 / (1 + exp(-eps (x - mu)))` with linear
/// weight `xi`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LogisticTerm {
    pub xi: f64,
    pub eps: f64,
    pub mu: f64,
}

impl LogisticTerm {
    pub fn lf(&self, x: f64) -> f64 {
        1.0 / (1.0 + (-self.eps * (x - self.mu)).exp())
    }

    /// d LF / dx.
    pub fn lf_dx(&self, x: f64) -> f64 {
        let l = self.lf(x);
        self.eps * l * (1.0 - l)
    }
}

/// One library term. `Linear` reads as `N` inside `f` and as the `N Wf`
/// cross term inside `g`; `Constant` reads as a bias inside `f` and as
/// the plain `Wf` term inside `g`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Term {
    Logistic(LogisticTerm),
    Linear { xi: f64 },
    Constant { xi: f64 },
}

impl Term {
    pub fn xi(&self) -> f64 {
        match self {
            Term::Logistic(t) => t.xi,
            Term::Linear { xi } => *xi,
            Term::Constant { xi } => *xi,
        }
    }

    pub fn xi_mut(&mut self) -> &mut f64 {
        match self {
            Term::Logistic(t) => &mut t.xi,
            Term::Linear { xi } => xi,
            Term::Constant { xi } => xi,
        }
    }

    /// Basis value without the linear weight.
    pub fn basis(&self, x: f64) -> f64 {
        match self {
            Term::Logistic(t) => t.lf(x),
            Term::Linear { .. } => x,
            Term::Constant { .. } => 1.0,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.xi() * self.basis(x)
    }

    /// d(term)/dx.
    pub fn eval_dx(&self, x: f64) -> f64 {
        match self {
            Term::Logistic(t) => t.xi * t.lf_dx(x),
            Term::Linear { xi } => *xi,
            Term::Constant { .. } => 0.0,
        }
    }
}

/// Fit provenance: regularization schedule, thresholds and the per-round
/// iteration history.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ModelLineage {
    pub l1_weights: Vec<f64>,
    pub threshold: f64,
    pub zero_penalty: f64,
    pub rounds: Vec<RoundLog>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundLog {
    pub l1_weight: f64,
    pub iterations: usize,
    pub final_loss: f64,
    pub best_validation_mae_rpm: f64,
    pub active_terms: usize,
}

/// The identified control-affine model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SindyModel {
    pub f_terms: Vec<Term>,
    pub g_terms: Vec<Term>,
    pub lineage: ModelLineage,
}

/// Local linearization of the governing equation at a steady point.
#[derive(Debug, Clone, Copy)]
pub struct Linearization {
    /// State coefficient (must be negative for a stable point).
    pub a: f64,
    /// Input coefficient `g(N)`.
    pub b: f64,
    /// Engine gain `-b/a`.
    pub k_e: f64,
    /// Engine time constant `-1/a`, s.
    pub t_e: f64,
}

impl SindyModel {
    /// Autonomous part `f(N)`.
    pub fn f(&self, n: f64) -> f64 {
        self.f_terms.iter().map(|t| t.eval(n)).sum()
    }

    /// Input gain `g(N)`.
    pub fn g(&self, n: f64) -> f64 {
        self.g_terms.iter().map(|t| t.eval(n)).sum()
    }

    pub fn f_dx(&self, n: f64) -> f64 {
        self.f_terms.iter().map(|t| t.eval_dx(n)).sum()
    }

    pub fn g_dx(&self, n: f64) -> f64 {
        self.g_terms.iter().map(|t| t.eval_dx(n)).sum()
    }

    /// `dN/dt = f(N) + g(N) Wf`.
    pub fn eval(&self, n: f64, w_f: f64) -> f64 {
        self.f(n) + self.g(n) * w_f
    }

    /// Steady fuel flow balancing the autonomous drift: `-f(N)/g(N)`.
    pub fn steady_fuel(&self, n: f64) -> Result<f64> {
        let g = self.g(n);
        if g.abs() < 1e-9 {
            return Err(Error::invalid(format!(
                "steady_fuel: input gain vanishes at N = {n}"
            )));
        }
        Ok(-self.f(n) / g)
    }

    /// Analytic linearization at the steady point belonging to `n`:
    /// `a = f'(N) + g'(N) Wf_ss`, `b = g(N)`.
    pub fn linearize(&self, n: f64) -> Result<Linearization> {
        let w_f = self.steady_fuel(n)?;
        let a = self.f_dx(n) + self.g_dx(n) * w_f;
        let b = self.g(n);
        if a >= 0.0 {
            return Err(Error::Infeasible(format!(
                "linearize: unstable local dynamics (a = {a:.4}) at N = {n}"
            )));
        }
        Ok(Linearization {
            a,
            b,
            k_e: -b / a,
            t_e: -1.0 / a,
        })
    }

    /// Integrate the autonomous dynamics `dN/dt = f(N)` from several
    /// initial conditions on a common grid. Rows freeze once the state
    /// decays below 1e-4.
    pub fn gen_autonomous(
        &self,
        initial_conditions: &[f64],
        dt: f64,
        t_max: f64,
    ) -> Result<nalgebra::DMatrix<f64>> {
        if initial_conditions.is_empty() {
            return Err(Error::invalid("gen_autonomous: no initial conditions"));
        }
        if initial_conditions.iter().any(|n| *n <= 0.0 || *n > 1.5) {
            return Err(Error::invalid("gen_autonomous: initial conditions must lie in (0, 1.5]"));
        }
        let steps = (t_max / dt).round() as usize;
        let mut out = nalgebra::DMatrix::zeros(initial_conditions.len(), steps + 1);
        for (row, &n0) in initial_conditions.iter().enumerate() {
            let mut n = n0;
            out[(row, 0)] = n;
            let mut frozen = false;
            for k in 1..=steps {
                if !frozen {
                    let k1 = self.f(n);
                    let k2 = self.f(n + 0.5 * dt * k1);
                    let k3 = self.f(n + 0.5 * dt * k2);
                    let k4 = self.f(n + dt * k3);
                    n += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                    if !n.is_finite() {
                        return Err(Error::NonFinite {
                            context: "gen_autonomous".into(),
                            t: k as f64 * dt,
                        });
                    }
                    if n <= 1e-4 {
                        frozen = true;
                        n = n.max(0.0);
                    }
                }
                out[(row, k)] = n;
            }
        }
        Ok(out)
    }

    /// Count of active (nonzero-weight) terms.
    pub fn active_terms(&self) -> usize {
        self.f_terms.iter().chain(self.g_terms.iter()).filter(|t| t.xi() != 0.0).count()
    }
}

impl std::fmt::Display for SindyModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let side = |terms: &[Term], var: &str, out: &mut std::fmt::Formatter<'_>| -> std::fmt::Result {
            let mut first = true;
            for t in terms {
                if t.xi() == 0.0 {
                    continue;
                }
                let sign = if t.xi() < 0.0 { "-" } else if first { "" } else { "+" };
                let mag = t.xi().abs();
                match t {
                    Term::Logistic(l) => write!(
                        out,
                        " {sign} {mag:.4}*LF({var}; eps={:.3}, mu={:.3})",
                        l.eps, l.mu
                    )?,
                    Term::Linear { .. } => write!(out, " {sign} {mag:.4}*{var}")?,
                    Term::Constant { .. } => write!(out, " {sign} {mag:.4}")?,
                }
                first = false;
            }
            if first {
                write!(out, " 0")?;
            }
            Ok(())
        };
        write!(f, "dN/dt =")?;
        side(&self.f_terms, "N", f)?;
        write!(f, " + [")?;
        side(&self.g_terms, "N", f)?;
        write!(f, " ] * Wf")
    }
}
