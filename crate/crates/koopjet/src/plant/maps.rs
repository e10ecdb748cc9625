//! Analytic surrogate component maps.
//!
//! The published characteristics of real engines are proprietary, so the
//! components are represented by smooth monotone surrogates sized around
//! the design point: the compressor pressure ratio grows with the 1.8th
//! power of corrected speed along beta lines, the efficiency is an
//! elliptic bowl, and the turbine flow saturates toward choking.

use serde::{Deserialize, Serialize};

/// Tunable shape parameters of the surrogate maps.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct MapParams {
    /// Speed exponent of the pressure-ratio rise.
    pub pi_speed_exp: f64,
    /// Speed exponent of the corrected-flow rise.
    pub flow_speed_exp: f64,
    /// Compressor peak adiabatic efficiency.
    pub eta_c_peak: f64,
    /// Efficiency bowl curvature in beta.
    pub eta_c_beta_curv: f64,
    /// Efficiency bowl curvature in speed.
    pub eta_c_speed_curv: f64,
    /// Relative speed of the compressor efficiency peak.
    pub eta_c_speed_center: f64,
    /// Turbine design adiabatic efficiency (refined during sizing).
    pub eta_t_dp: f64,
    /// Turbine efficiency curvature in corrected speed.
    pub eta_t_speed_curv: f64,
    /// Relative corrected speed of the turbine efficiency peak.
    pub eta_t_speed_center: f64,
    /// Sharpness of the turbine choking saturation.
    pub turbine_choke_sharpness: f64,
    /// Burner peak efficiency.
    pub eta_b_peak: f64,
    /// Burner efficiency fall-off with the loading parameter.
    pub eta_b_slope: f64,
    /// Exhaust duct pressure recovery.
    pub sigma_exh: f64,
}

impl Default for MapParams {
    fn default() -> Self {
        MapParams {
            pi_speed_exp: 1.8,
            flow_speed_exp: 1.2,
            eta_c_peak: 0.82,
            eta_c_beta_curv: 0.35,
            eta_c_speed_curv: 0.30,
            eta_c_speed_center: 0.90,
            eta_t_dp: 0.88,
            eta_t_speed_curv: 0.22,
            eta_t_speed_center: 0.85,
            turbine_choke_sharpness: 1.6,
            eta_b_peak: 0.985,
            eta_b_slope: 0.8,
            sigma_exh: 0.985,
        }
    }
}

/// Compressor map output at one (beta, corrected-speed) point.
#[derive(Debug, Clone, Copy)]
pub struct CompressorPoint {
    /// Corrected mass flow, kg/s.
    pub w_corr: f64,
    pub pi_c: f64,
    pub eta_c: f64,
}

/// Turbine map output at one (corrected-speed, pressure-ratio) point.
#[derive(Debug, Clone, Copy)]
pub struct TurbinePoint {
    /// Corrected gas mass flow, kg/s.
    pub w_corr: f64,
    /// Relative total-temperature drop dT / T_t.
    pub dt_rel: f64,
}

/// Sized surrogate map set. Design-derived quantities (turbine corrected
/// flow, design turbine pressure ratio, reference loading) are filled in
/// by the plant sizing pass.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurrogateMaps {
    pub params: MapParams,
    /// Design pressure ratio and corrected flow of the compressor.
    pub pi_c_dp: f64,
    pub w_c_dp: f64,
    /// Reference corrected speed (design), RPM.
    pub n_corr_dp: f64,
    /// Turbine design corrected flow, kg/s (sized).
    pub w_t_corr_dp: f64,
    /// Turbine design pressure ratio (sized).
    pub pi_t_dp: f64,
    /// Turbine design corrected speed, RPM (sized).
    pub n_t_corr_dp: f64,
    /// Burner reference loading parameter (sized).
    pub omega_dp: f64,
    pub gamma_a: f64,
    pub gamma_g: f64,
}

pub const BETA_MIN: f64 = -0.10;
pub const BETA_MAX: f64 = 1.10;
pub const SPEED_MIN: f64 = 0.25;
pub const SPEED_MAX: f64 = 1.18;
pub const PI_T_MIN: f64 = 1.01;
pub const PI_T_MAX: f64 = 2.6;

impl SurrogateMaps {
    /// Beta-line shape factor for the pressure ratio; equals 1 at the
    /// design beta of 0.5.
    fn beta_shape(beta: f64) -> f64 {
        0.8 + 0.4 * beta
    }

    pub fn in_domain(beta: f64, n_rel: f64) -> bool {
        (BETA_MIN..=BETA_MAX).contains(&beta) && (SPEED_MIN..=SPEED_MAX).contains(&n_rel)
    }

    /// Compressor map: corrected flow, pressure ratio and efficiency as
    /// functions of the beta coordinate and relative corrected speed.
    pub fn compressor(&self, beta: f64, n_corr: f64) -> CompressorPoint {
        let p = &self.params;
        let n_rel = n_corr / self.n_corr_dp;
        let pi_c = 1.0 + (self.pi_c_dp - 1.0) * n_rel.powf(p.pi_speed_exp) * Self::beta_shape(beta);
        let w_corr = self.w_c_dp * n_rel.powf(p.flow_speed_exp) * (1.3 - 0.6 * beta);
        let eta_c = (p.eta_c_peak
            - p.eta_c_beta_curv * (beta - 0.5).powi(2)
            - p.eta_c_speed_curv * (n_rel - p.eta_c_speed_center).powi(2))
        .clamp(0.55, 0.88);
        CompressorPoint { w_corr, pi_c, eta_c }
    }

    /// Turbine map: corrected flow (saturating toward choking) and
    /// relative temperature drop.
    pub fn turbine(&self, n_t_corr: f64, pi_t: f64) -> TurbinePoint {
        let p = &self.params;
        let n_rel = n_t_corr / self.n_t_corr_dp;
        let x = ((pi_t - 1.0) / (self.pi_t_dp - 1.0)).max(0.0);
        let k = p.turbine_choke_sharpness;
        let sat = (k * x).tanh() / k.tanh();
        let w_corr = self.w_t_corr_dp * sat * (0.97 + 0.03 * n_rel);
        let eta_t = (p.eta_t_dp - p.eta_t_speed_curv * (n_rel - p.eta_t_speed_center).powi(2)).clamp(0.5, 0.92);
        let expo = (1.0 - self.gamma_g) / self.gamma_g;
        let dt_rel = eta_t * (1.0 - pi_t.powf(expo));
        TurbinePoint { w_corr, dt_rel }
    }

    /// Burner efficiency versus the corrected-flow loading parameter
    /// omega = W_cc sqrt(T_cc/288) / (p_cc/101325).
    pub fn burner_efficiency(&self, omega: f64) -> f64 {
        let p = &self.params;
        let rel = omega / self.omega_dp;
        (p.eta_b_peak - p.eta_b_slope * 0.05 * (1.0 - rel).powi(2)).clamp(0.80, 1.0)
    }

    /// Combustion-chamber pressure recovery as a function of loading and
    /// the temperature-rise ratio.
    pub fn sigma_cc(&self, omega: f64, temp_ratio: f64) -> f64 {
        let rel = omega / self.omega_dp;
        (0.960 - 0.010 * rel * rel - 0.006 * (temp_ratio - 1.0)).clamp(0.90, 0.97)
    }

    pub fn sigma_exhaust(&self) -> f64 {
        self.params.sigma_exh
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn maps() -> SurrogateMaps {
        SurrogateMaps {
            params: MapParams::default(),
            pi_c_dp: 4.2,
            w_c_dp: 16.0,
            n_corr_dp: 14_000.0,
            w_t_corr_dp: 8.4,
            pi_t_dp: 1.96,
            n_t_corr_dp: 7000.0,
            omega_dp: 5.2,
            gamma_a: 1.4,
            gamma_g: 1.33,
        }
    }

    #[test]
    fn pressure_ratio_increases_with_beta() {
        let m = maps();
        for n in [6000.0, 10_000.0, 14_000.0] {
            let mut prev = 0.0;
            for i in 0..20 {
                let beta = 0.02 + 0.05 * i as f64;
                let pt = m.compressor(beta, n);
                assert!(pt.pi_c > prev, "pi_c not increasing at n={n} beta={beta}");
                prev = pt.pi_c;
            }
        }
    }

    #[test]
    fn flow_monotone_in_beta_and_design_point_anchored() {
        let m = maps();
        let a = m.compressor(0.2, 14_000.0);
        let b = m.compressor(0.8, 14_000.0);
        assert!(a.w_corr > b.w_corr);
        let dp = m.compressor(0.5, 14_000.0);
        assert!((dp.pi_c - 4.2).abs() < 1e-12);
        assert!((dp.w_corr - 16.0).abs() < 1e-12);
    }

    #[test]
    fn efficiencies_bounded() {
        let m = maps();
        for i in 0..30 {
            let beta = 0.01 + i as f64 * 0.033;
            for n in [5000.0, 9000.0, 15_000.0] {
                let c = m.compressor(beta, n);
                assert!(c.eta_c > 0.0 && c.eta_c < 1.0);
            }
        }
    }

    #[test]
    fn turbine_flow_saturates() {
        let m = maps();
        let low = m.turbine(7000.0, 1.3);
        let mid = m.turbine(7000.0, 1.96);
        let hi = m.turbine(7000.0, 2.5);
        assert!(low.w_corr < mid.w_corr);
        // near choking the extra flow from pressure ratio is small
        assert!((hi.w_corr - mid.w_corr) / mid.w_corr < 0.08);
        assert!(mid.dt_rel > low.dt_rel);
    }
}
