//! Shared numerical machinery: gradient descent with adaptive momentum,
//! swarm and genetic global optimizers, ridge regression, a continuous
//! algebraic Riccati solver, fixed-step ODE integration, Savitzky-Golay
//! filtering and finite differences.

mod adam;
mod care;
mod diff;
mod ga;
mod ode;
mod pso;
mod ridge;
mod savgol;

pub use adam::{adam_step, AdamState};
pub use care::{solve_care, solve_lyapunov, CareProblem};
pub use diff::central_diff;
pub use ga::{ga_minimize, GaConfig};
pub use ode::{integrate_ode, integrate_scalar, rk4_step, Trajectory};
pub use pso::{pso_minimize, SwarmConfig};
pub use ridge::ridge_solve;
pub use savgol::{savgol_coefficients, savitzky_golay, savitzky_golay_derivative};
