//! Classical gain/phase margins of the scalar loop broken at the fuel
//! command.
//!
//! The open-loop model keeps the plant path and the observer/feedback
//! path; the tracking-integral feedback row is zeroed (the integral of
//! the demanded output only), so the integrator state drops out of the
//! loop transfer.

use super::lqgi::{augment_system, LqgiDesign};
use crate::error::Result;
use crate::koopman::KoopmanModel;
use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginRow {
    pub n_i: f64,
    pub gm_db: f64,
    pub pm_deg: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginReport {
    pub rows: Vec<MarginRow>,
    pub gm_min_db: f64,
    pub pm_min_deg: f64,
}

/// Extract classical margins from a frequency response: the gain margin
/// at phase crossings of -180 degrees, the phase margin at unit-gain
/// crossings. Missing crossings give infinite gain margin / 180 degrees.
pub fn margins_from_response(omega: &[f64], response: &[Complex<f64>]) -> (f64, f64) {
    let mags: Vec<f64> = response.iter().map(|l| l.norm()).collect();
    // unwrapped phase in degrees
    let mut phase: Vec<f64> = Vec::with_capacity(response.len());
    let mut prev = response[0].arg();
    let mut offset = 0.0;
    for l in response {
        let mut p = l.arg();
        while p + offset - prev > std::f64::consts::PI {
            offset -= 2.0 * std::f64::consts::PI;
        }
        while p + offset - prev < -std::f64::consts::PI {
            offset += 2.0 * std::f64::consts::PI;
        }
        p += offset;
        prev = p;
        phase.push(p.to_degrees());
    }

    let mut gm_db = f64::INFINITY;
    let mut pm_deg = 180.0_f64;
    for i in 1..omega.len() {
        // phase crossover: phase passes -180 (any wrap k*360 - 180)
        let (p0, p1) = (phase[i - 1], phase[i]);
        for k in -4..=4 {
            let target = -180.0 + 360.0 * k as f64;
            if (p0 - target) * (p1 - target) < 0.0 {
                let frac = (target - p0) / (p1 - p0);
                let mag = mags[i - 1] + frac * (mags[i] - mags[i - 1]);
                if mag > 0.0 {
                    gm_db = gm_db.min(-20.0 * mag.log10());
                }
            }
        }
        // gain crossover: |L| passes 1
        if (mags[i - 1] - 1.0) * (mags[i] - 1.0) < 0.0 {
            let frac = (1.0 - mags[i - 1]) / (mags[i] - mags[i - 1]);
            let ph = p0 + frac * (p1 - p0);
            // distance to the nearest -180 (mod 360)
            let rel = (ph + 180.0).rem_euclid(360.0);
            let pm = rel.min(360.0 - rel);
            pm_deg = pm_deg.min(pm);
        }
    }
    (gm_db, pm_deg)
}

/// Open-loop frequency response of the designed controller at one
/// operating point, broken at the fuel command.
fn loop_response(
    kem: &KoopmanModel,
    design: &LqgiDesign,
    n_i: f64,
    omega: &[f64],
) -> Result<Vec<Complex<f64>>> {
    let n = kem.dim();
    let na = n + 1;
    let (a_aug, b_aug, _) = augment_system(kem, n_i, design.t_f);
    let a_i = a_aug.view((0, 0), (na, na)).into_owned();
    let b_i = DVector::from_fn(na, |i, _| b_aug[i]);
    let mut c_i = DVector::zeros(na);
    for j in 0..n {
        c_i[j] = kem.c[j];
    }
    let k_full = design.schedule.gain_at(n_i);
    let k_zeta = DVector::from_fn(na, |i, _| k_full[i]);
    let mut l_zeta = DVector::zeros(na);
    for j in 0..n {
        l_zeta[j] = design.kalman_gain[j];
    }

    // states [plant zeta; observer zeta], input v, output -K zeta_hat
    let dim = 2 * na;
    let mut a = DMatrix::zeros(dim, dim);
    let lc = &l_zeta * c_i.transpose();
    let a_obs = &a_i - &lc - &b_i * k_zeta.transpose();
    for i in 0..na {
        for j in 0..na {
            a[(i, j)] = a_i[(i, j)];
            a[(na + i, j)] = lc[(i, j)];
            a[(na + i, na + j)] = a_obs[(i, j)];
        }
    }
    let mut b = DVector::zeros(dim);
    for i in 0..na {
        b[i] = b_i[i];
    }
    let mut c = DVector::zeros(dim);
    for i in 0..na {
        c[na + i] = -k_zeta[i];
    }

    let a_c = a.map(Complex::from);
    let b_c = b.map(Complex::from);
    let mut out = Vec::with_capacity(omega.len());
    for &w in omega {
        let jw = Complex::new(0.0, w);
        let mut m = -a_c.clone();
        for i in 0..dim {
            m[(i, i)] += jw;
        }
        let x = m
            .lu()
            .solve(&b_c)
            .ok_or_else(|| crate::error::Error::convergence("margins", "singular (jwI - A)"))?;
        let t: Complex<f64> = (0..dim).map(|i| Complex::from(c[i]) * x[i]).sum();
        // loop transfer in the negative-feedback convention
        out.push(-t);
    }
    Ok(out)
}

/// Margins of the designed controller over an operating grid.
pub fn margins_of_design(
    kem: &KoopmanModel,
    design: &LqgiDesign,
    grid: &[f64],
    omega: &[f64],
) -> Result<MarginReport> {
    let mut rows = Vec::with_capacity(grid.len());
    let mut gm_min = f64::INFINITY;
    let mut pm_min = f64::INFINITY;
    for &n_i in grid {
        let resp = loop_response(kem, design, n_i, omega)?;
        let (gm, pm) = margins_from_response(omega, &resp);
        gm_min = gm_min.min(gm);
        pm_min = pm_min.min(pm);
        rows.push(MarginRow { n_i, gm_db: gm, pm_deg: pm });
    }
    Ok(MarginReport { rows, gm_min_db: gm_min, pm_min_deg: pm_min })
}

/// Log-spaced frequency grid for margin sweeps.
pub fn default_frequency_grid() -> Vec<f64> {
    let points = 400;
    (0..points)
        .map(|i| 10f64.powf(-2.0 + 5.0 * i as f64 / (points - 1) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_integrator_margins() {
        // L = k / s with k = 2
        let omega = default_frequency_grid();
        let resp: Vec<Complex<f64>> = omega
            .iter()
            .map(|w| Complex::new(2.0, 0.0) / Complex::new(0.0, *w))
            .collect();
        let (gm, pm) = margins_from_response(&omega, &resp);
        assert!(gm.is_infinite(), "GM {gm}");
        assert!((pm - 90.0).abs() < 0.5, "PM {pm}");
    }

    #[test]
    fn first_order_loop_infinite_gain_margin() {
        let omega = default_frequency_grid();
        let resp: Vec<Complex<f64>> = omega
            .iter()
            .map(|w| Complex::new(1.0, 0.0) / Complex::new(1.0, *w))
            .collect();
        let (gm, _) = margins_from_response(&omega, &resp);
        assert!(gm.is_infinite(), "GM {gm}");
    }

    #[test]
    fn second_order_with_delay_like_phase() {
        // L = 10 / (s+1)^3 has finite classical margins:
        // phase -180 at w = sqrt(3), |L| there = 10/8 -> GM = 20log10(8/10)
        let omega = default_frequency_grid();
        let resp: Vec<Complex<f64>> = omega
            .iter()
            .map(|w| {
                let den = Complex::new(1.0, *w);
                Complex::new(10.0, 0.0) / (den * den * den)
            })
            .collect();
        let (gm, pm) = margins_from_response(&omega, &resp);
        let expect_gm = -20.0 * (10.0f64 / 8.0).log10();
        assert!((gm - expect_gm).abs() < 0.05, "GM {gm} vs {expect_gm}");
        assert!(pm > 0.0 && pm < 90.0);
    }
}
