//! Interpolation and fitting helpers for gain schedules.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Natural cubic spline through sorted knots; evaluation clamps to the
/// knot range.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<CubicSpline> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::invalid("CubicSpline: need matching knots (>= 2)"));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("CubicSpline: knots must be strictly increasing"));
        }
        if n == 2 {
            return Ok(CubicSpline { x, y, m: vec![0.0; 2] });
        }
        // tridiagonal system for the natural second derivatives
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        b[0] = 1.0;
        b[n - 1] = 1.0;
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            a[i] = h0;
            b[i] = 2.0 * (h0 + h1);
            c[i] = h1;
            d[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        }
        // Thomas algorithm
        for i in 1..n {
            let w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            d[i] -= w * d[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = d[n - 1] / b[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (d[i] - c[i] * m[i + 1]) / b[i];
        }
        Ok(CubicSpline { x, y, m })
    }

    pub fn eval(&self, xq: f64) -> f64 {
        let n = self.x.len();
        let xq = xq.clamp(self.x[0], self.x[n - 1]);
        let i = self.x.partition_point(|v| *v <= xq).clamp(1, n - 1) - 1;
        let h = self.x[i + 1] - self.x[i];
        let t = (xq - self.x[i]) / h;
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        y0 * (1.0 - t) + y1 * t
            + h * h / 6.0
                * ((1.0 - t) * ((1.0 - t) * (1.0 - t) - 1.0) * m0 + t * (t * t - 1.0) * m1)
    }
}

/// Least-squares polynomial fit; coefficients in ascending powers.
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Result<Vec<f64>> {
    if xs.len() != ys.len() || xs.len() <= degree {
        return Err(Error::invalid("polyfit: need more points than the degree"));
    }
    let v = DMatrix::from_fn(xs.len(), degree + 1, |i, j| xs[i].powi(j as i32));
    let y = DVector::from_column_slice(ys);
    let sol = (v.transpose() * &v)
        .lu()
        .solve(&(v.transpose() * y))
        .ok_or_else(|| Error::convergence("polyfit", "singular Vandermonde system"))?;
    Ok(sol.iter().copied().collect())
}

/// Evaluate ascending-power coefficients at `x`.
pub fn polyval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}
