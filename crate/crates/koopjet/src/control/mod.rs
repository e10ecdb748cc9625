//! Controller synthesis and execution: classical PI, gain-scheduled
//! LPV-PI with flight correction, the governing-equation-based internal
//! model controller, and the Koopman LQG-with-integrator controller with
//! its steady Kalman observer, margin analysis and weight optimization.

mod imc;
mod lpv_pi;
mod lqgi;
mod margins;
mod pi;
mod schedule;
mod weights;

pub use imc::{imc_gains, ImcController};
pub use lpv_pi::{lpv_pi_design, LpvPiConfig, LpvPiSchedule};
pub use lqgi::{
    augment_system, estimate_noise, kalman_design, lqi_design, KlqiSchedule, LqgiController,
    LqgiDesign, ObserverNoise,
};
pub use margins::{default_frequency_grid as margins_frequency_grid, margins_from_response, margins_of_design, MarginReport, MarginRow};
pub use pi::{flight_gain_correction, PiController, PiGains};
pub use schedule::{polyfit, polyval, CubicSpline};
pub use weights::{optimize_weights, CommandProfile, WeightOptConfig, WeightOptResult};
