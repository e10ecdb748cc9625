//! Savitzky-Golay polynomial smoothing.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Least-squares polynomial weights evaluated at window position `at`
/// (0-based within the window). Row `at` of `V (V^T V)^-1 V^T` with the
/// Vandermonde matrix `V[j][p] = j^p`.
pub fn savgol_coefficients(window: usize, order: usize, at: usize) -> Result<Vec<f64>> {
    if window % 2 == 0 {
        return Err(Error::invalid("savitzky_golay: window must be odd"));
    }
    if order >= window {
        return Err(Error::invalid("savitzky_golay: order must be < window"));
    }
    if at >= window {
        return Err(Error::invalid("savitzky_golay: evaluation point outside window"));
    }
    let half = (window / 2) as f64;
    let v = DMatrix::from_fn(window, order + 1, |j, p| (j as f64 - half).powi(p as i32));
    let gram = v.transpose() * &v;
    let inv = gram
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::convergence("savitzky_golay", "singular Vandermonde system"))?;
    let proj = &v * inv * v.transpose();
    Ok((0..window).map(|j| proj[(at, j)]).collect())
}

/// Smooth `x` with a Savitzky-Golay filter. Interior points use the
/// centered window; the first and last half-windows are smoothed by
/// evaluating the boundary-window fit at their own positions, so
/// polynomials up to `order` are reproduced exactly everywhere.
pub fn savitzky_golay(x: &[f64], window: usize, order: usize) -> Result<Vec<f64>> {
    if window > x.len() {
        return Err(Error::invalid(format!(
            "savitzky_golay: window {window} longer than series {}",
            x.len()
        )));
    }
    let half = window / 2;
    let center = savgol_coefficients(window, order, half)?;
    let mut out = vec![0.0; x.len()];
    for i in half..x.len() - half {
        let mut acc = 0.0;
        for (j, w) in center.iter().enumerate() {
            acc += w * x[i - half + j];
        }
        out[i] = acc;
    }
    for i in 0..half {
        let w = savgol_coefficients(window, order, i)?;
        out[i] = w.iter().zip(&x[..window]).map(|(w, v)| w * v).sum();
        let w_end = savgol_coefficients(window, order, window - 1 - i)?;
        let tail = &x[x.len() - window..];
        out[x.len() - 1 - i] = w_end.iter().zip(tail).map(|(w, v)| w * v).sum();
    }
    Ok(out)
}

/// Causal derivative estimate: fit a polynomial to the trailing window and
/// differentiate it at the newest sample. Used by controllers that need an
/// online derivative of a noisy error signal.
pub fn savitzky_golay_derivative(history: &[f64], order: usize, dt: f64) -> f64 {
    let window = history.len();
    if window < 2 {
        return 0.0;
    }
    let order = order.min(window - 1);
    let v = DMatrix::from_fn(window, order + 1, |j, p| (j as f64).powi(p as i32));
    let y = nalgebra::DVector::from_column_slice(history);
    let gram = v.transpose() * &v;
    let rhs = v.transpose() * y;
    match gram.lu().solve(&rhs) {
        Some(c) => {
            let last = (window - 1) as f64;
            let mut d = 0.0;
            for p in 1..=order {
                d += c[p] * p as f64 * last.powi(p as i32 - 1);
            }
            d / dt
        }
        None => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn reproduces_quadratic() {
        let x: Vec<f64> = (0..200).map(|i| (i as f64 * 0.1).powi(2)).collect();
        let y = savitzky_golay(&x, 21, 2).unwrap();
        for i in 0..x.len() {
            assert!((y[i] - x[i]).abs() < 1e-9, "i={i} err={}", (y[i] - x[i]).abs());
        }
        // interior points are exact to much tighter tolerance
        for i in 10..190 {
            assert!((y[i] - x[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_unchanged() {
        let x = vec![3.7; 60];
        let y = savitzky_golay(&x, 11, 3).unwrap();
        assert!(y.iter().all(|v| (v - 3.7).abs() < 1e-12));
    }

    #[test]
    fn reduces_noise_variance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let x: Vec<f64> = (0..5000)
            .map(|_| {
                let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
                let u2: f64 = rng.random();
                (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            })
            .collect();
        let y = savitzky_golay(&x, 21, 3).unwrap();
        let var = |s: &[f64]| {
            let m = s.iter().sum::<f64>() / s.len() as f64;
            s.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / s.len() as f64
        };
        assert!(var(&y) < var(&x));
    }

    #[test]
    fn window_longer_than_series_rejected() {
        assert!(savitzky_golay(&[1.0, 2.0, 3.0], 5, 2).is_err());
        assert!(savitzky_golay(&[1.0; 10], 4, 2).is_err()); // even window
        assert!(savitzky_golay(&[1.0; 10], 5, 5).is_err()); // order >= window
    }

    #[test]
    fn causal_derivative_of_line() {
        let hist: Vec<f64> = (0..20).map(|i| 2.0 * i as f64).collect();
        let d = savitzky_golay_derivative(&hist, 2, 0.5);
        assert!((d - 4.0).abs() < 1e-9);
    }
}
