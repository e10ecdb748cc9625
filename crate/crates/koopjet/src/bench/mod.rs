//! Closed-loop evaluation harness: reference-tracking and
//! disturbance-rejection scenarios against the component-level plant,
//! metric computation and report emission.

mod metrics;
mod report;
mod runner;
mod scenario;

pub use metrics::{compute_metrics, Metrics};
pub use report::{write_summary, write_trace};
pub use runner::{run_tracking, ControllerSet, Governor, Trace};
pub use scenario::{canonical_profile, disturbance_scenario, varying_flight_scenario, FlightPath, Scenario};
