//! International Standard Atmosphere and inlet total conditions.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const P_STD: f64 = 101_325.0;
pub const T_STD: f64 = 288.15;
/// Reference temperature of the corrected-quantity convention, K.
pub const T_REF: f64 = 288.0;
const LAPSE: f64 = 0.0065;
const ISA_EXP: f64 = 5.255_88; // g / (lapse * R_air)
const SIGMA_INLET: f64 = 0.98;
const GAMMA_A: f64 = 1.4;

/// Flight condition and the resulting inlet total state.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Ambient {
    /// Altitude, m.
    pub h: f64,
    /// Flight Mach number.
    pub m0: f64,
    /// Static pressure, Pa.
    pub p0: f64,
    /// Static temperature, K.
    pub t0: f64,
    /// Inlet total pressure (after inlet loss), Pa.
    pub p1t: f64,
    /// Inlet total temperature, K.
    pub t1t: f64,
}

impl Ambient {
    /// Sea-level static standard day.
    pub fn sea_level_static() -> Ambient {
        isa_inlet(0.0, 0.0).expect("sea-level static is inside the envelope")
    }

    /// sqrt(288 / T1t), the corrected-speed factor.
    pub fn theta_factor(&self) -> f64 {
        (T_REF / self.t1t).sqrt()
    }

    /// 101325 / p1t, the corrected-pressure factor.
    pub fn delta_factor(&self) -> f64 {
        P_STD / self.p1t
    }
}

/// Troposphere ISA state plus isentropic ram rise and a fixed inlet
/// pressure-recovery factor.
pub fn isa_inlet(h: f64, m0: f64) -> Result<Ambient> {
    if !(0.0..=11_000.0).contains(&h) {
        return Err(Error::invalid(format!("isa_inlet: altitude {h} m outside [0, 11000]")));
    }
    if !(0.0..1.0).contains(&m0) {
        return Err(Error::invalid(format!("isa_inlet: Mach {m0} outside [0, 1)")));
    }
    let t0 = T_STD - LAPSE * h;
    let p0 = P_STD * (t0 / T_STD).powf(ISA_EXP);
    let ratio = 1.0 + 0.5 * (GAMMA_A - 1.0) * m0 * m0;
    let t1t = t0 * ratio;
    let p1t = p0 * ratio.powf(GAMMA_A / (GAMMA_A - 1.0)) * SIGMA_INLET;
    Ok(Ambient { h, m0, p0, t0, p1t, t1t })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sea_level_static() {
        let a = isa_inlet(0.0, 0.0).unwrap();
        assert!((a.t1t - 288.15).abs() < 1e-9);
        assert!((a.p1t - 101_325.0 * SIGMA_INLET).abs() < 1e-6);
    }

    #[test]
    fn ram_temperature_rise_at_mach_half() {
        let a = isa_inlet(0.0, 0.5).unwrap();
        assert!((a.t1t / a.t0 - 1.05).abs() < 1e-12);
    }

    #[test]
    fn tropopause_temperature() {
        let a = isa_inlet(11_000.0, 0.0).unwrap();
        assert!((a.t0 - 216.65).abs() < 1e-9);
    }

    #[test]
    fn out_of_envelope_rejected() {
        assert!(isa_inlet(-1.0, 0.0).is_err());
        assert!(isa_inlet(12_000.0, 0.0).is_err());
        assert!(isa_inlet(0.0, 1.0).is_err());
    }
}
