//! Second-order finite differencing of uniformly sampled series.

use crate::error::{Error, Result};

/// Central differences in the interior, one-sided second-order stencils at
/// the endpoints.
pub fn central_diff(x: &[f64], dt: f64) -> Result<Vec<f64>> {
    if x.len() < 3 {
        return Err(Error::invalid("central_diff: need at least 3 samples"));
    }
    if dt <= 0.0 {
        return Err(Error::invalid("central_diff: dt must be positive"));
    }
    let n = x.len();
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * x[0] + 4.0 * x[1] - x[2]) / (2.0 * dt);
    for i in 1..n - 1 {
        d[i] = (x[i + 1] - x[i - 1]) / (2.0 * dt);
    }
    d[n - 1] = (3.0 * x[n - 1] - 4.0 * x[n - 2] + x[n - 3]) / (2.0 * dt);
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_exact() {
        let dt = 0.05;
        let x: Vec<f64> = (0..100).map(|i| 1.0 + i as f64 * dt).collect();
        let d = central_diff(&x, dt).unwrap();
        assert!(d.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn quadratic_symmetry_at_origin() {
        let dt = 0.1;
        // grid centered on t = 0
        let x: Vec<f64> = (-5..=5).map(|i| (i as f64 * dt).powi(2)).collect();
        let d = central_diff(&x, dt).unwrap();
        assert_eq!(d[5], 0.0);
    }

    #[test]
    fn sine_second_order_accuracy() {
        let dt = 1e-3;
        let x: Vec<f64> = (0..2000).map(|i| (i as f64 * dt).sin()).collect();
        let d = central_diff(&x, dt).unwrap();
        let max_err = d
            .iter()
            .enumerate()
            .skip(1)
            .take(1998)
            .map(|(i, v)| (v - (i as f64 * dt).cos()).abs())
            .fold(0.0f64, f64::max);
        assert!(max_err <= 1e-6, "max interior error {max_err}");
    }

    #[test]
    fn short_series_rejected() {
        assert!(central_diff(&[1.0, 2.0], 0.1).is_err());
    }
}
