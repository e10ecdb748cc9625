//! Reference nonlinear component-level turbojet simulator.
//!
//! Ground truth for data generation and controller benchmarking. Component
//! behavior comes from smooth analytic surrogate maps sized around a design
//! point; transient operation closes compressor-turbine and turbine-nozzle
//! mass-flow continuity with a Newton-Raphson two-variable match.

mod ambient;
mod engine;
mod limiter;
mod maps;

pub use ambient::{isa_inlet, Ambient, P_STD, T_REF, T_STD};
pub use engine::{Plant, PlantState, StepOutput};
pub use limiter::LimiterTables;
pub use maps::{CompressorPoint, MapParams, SurrogateMaps, TurbinePoint};

use serde::{Deserialize, Serialize};

/// Physical constants of the gas path and shaft.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConstants {
    /// Shaft polar moment of inertia, kg m^2.
    pub inertia: f64,
    /// Mechanical efficiency of the shaft.
    pub eta_m: f64,
    /// Fuel lower heating value, J/kg.
    pub h_l: f64,
    /// Heat capacity of air, J/(kg K).
    pub c_pa: f64,
    /// Heat capacity of combustion gas, J/(kg K).
    pub c_pg: f64,
    pub gamma_a: f64,
    pub gamma_g: f64,
    /// Gas constant, J/(kg K).
    pub r_gas: f64,
    /// Nozzle flow coefficient.
    pub mu_n: f64,
    /// Nozzle adiabatic efficiency.
    pub eta_n: f64,
    /// Fuel system time constant, s.
    pub t_f: f64,
    /// Constant accessory/bleed power draw, W (calibrated so the idle
    /// steady fuel flow lands on the normalization offset).
    pub p_load: f64,
}

impl Default for EngineConstants {
    fn default() -> Self {
        EngineConstants {
            inertia: 1.0,
            eta_m: 0.99,
            h_l: 43.1e6,
            c_pa: 1005.0,
            c_pg: 1150.0,
            gamma_a: 1.4,
            gamma_g: 1.33,
            r_gas: 287.05,
            mu_n: 0.98,
            eta_n: 0.95,
            t_f: 0.15,
            p_load: 30e3,
        }
    }
}

/// Sea-level standard-day design point that sizes the surrogate maps.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DesignPoint {
    /// Nominal (design) spool speed, RPM.
    pub n_dp: f64,
    /// Ground-idle spool speed, RPM.
    pub n_idle: f64,
    /// Compressor design pressure ratio.
    pub pi_c_dp: f64,
    /// Turbine inlet total temperature at design, K.
    pub t_t_dp: f64,
    /// Corrected air mass flow at design, kg/s.
    pub w_c_dp: f64,
}

impl Default for DesignPoint {
    fn default() -> Self {
        DesignPoint {
            n_dp: 14_000.0,
            n_idle: 5_000.0,
            pi_c_dp: 4.2,
            t_t_dp: 1150.0,
            w_c_dp: 16.0,
        }
    }
}

/// Full plant configuration (the JSON document read by the CLI).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantConfig {
    pub constants: EngineConstants,
    pub design: DesignPoint,
    pub maps: MapParams,
    pub limiter: limiter::LimiterParams,
}
