//! Fixed-step 4th-order Runge-Kutta integration with dense output.

use crate::error::{Error, Result};
use nalgebra::DVector;

/// Dense trajectory on the uniform grid `t0 + i dt`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub x: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Extract one state component as a plain series.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.x.iter().map(|x| x[i]).collect()
    }
}

/// Single RK4 step for a vector state.
pub fn rk4_step<F>(rhs: &F, t: f64, x: &DVector<f64>, dt: f64) -> DVector<f64>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
{
    let k1 = rhs(t, x);
    let k2 = rhs(t + dt / 2.0, &(x + &k1 * (dt / 2.0)));
    let k3 = rhs(t + dt / 2.0, &(x + &k2 * (dt / 2.0)));
    let k4 = rhs(t + dt, &(x + &k3 * dt));
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// Integrate `dx/dt = rhs(t, x)` from `t_span.0` to `t_span.1` with step
/// `dt`. The final grid point lands within one step of `t_span.1`. A NaN
/// produced by the right-hand side aborts with the offending time stamp.
pub fn integrate_ode<F>(
    rhs: F,
    x0: &DVector<f64>,
    t_span: (f64, f64),
    dt: f64,
) -> Result<Trajectory>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
{
    if dt <= 0.0 {
        return Err(Error::invalid("integrate_ode: dt must be positive"));
    }
    let (t0, t1) = t_span;
    if t1 < t0 {
        return Err(Error::invalid("integrate_ode: t_end before t_start"));
    }
    let steps = ((t1 - t0) / dt).round() as usize;
    let mut t = Vec::with_capacity(steps + 1);
    let mut x = Vec::with_capacity(steps + 1);
    t.push(t0);
    x.push(x0.clone());
    let mut cur = x0.clone();
    for i in 0..steps {
        let ti = t0 + i as f64 * dt;
        cur = rk4_step(&rhs, ti, &cur, dt);
        if cur.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "integrate_ode state".into(),
                t: ti + dt,
            });
        }
        t.push(t0 + (i + 1) as f64 * dt);
        x.push(cur.clone());
    }
    Ok(Trajectory { t, x })
}

/// Scalar convenience wrapper around [`integrate_ode`].
pub fn integrate_scalar<F>(rhs: F, x0: f64, t_span: (f64, f64), dt: f64) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(f64, f64) -> f64,
{
    let traj = integrate_ode(
        |t, x: &DVector<f64>| DVector::from_element(1, rhs(t, x[0])),
        &DVector::from_element(1, x0),
        t_span,
        dt,
    )?;
    Ok((traj.t.clone(), traj.component(0)))
}
