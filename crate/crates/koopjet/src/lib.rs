//! Identification and optimal control of a single-spool turbojet from
//! closed-loop operational data.
//!
//! The toolkit covers the whole chain:
//!
//! * [`plant`] — a reference component-level simulator (surrogate maps,
//!   Newton-Raphson matching, fuel system, limiters) used as ground truth,
//! * [`datakit`] — excitation profiles, measurement simulation, filtering
//!   and corrected/normalized quantities,
//! * [`sindy`] — control-affine governing-equation identification with
//!   adaptive logistic bases,
//! * [`koopman`] — eigenvalue optimization by temporal projection,
//!   eigenfunction regression from the Koopman PDE, and assembly of the
//!   eigenfunction model,
//! * [`control`] — PI, gain-scheduled LPV-PI, internal-model and
//!   Koopman LQG-with-integrator controller synthesis,
//! * [`bench`] — closed-loop evaluation scenarios and metrics,
//! * [`numerics`] — the shared optimization / linear-algebra machinery.

pub mod bench;
pub mod control;
pub mod datakit;
pub mod error;
pub mod koopman;
pub mod numerics;
pub mod pipeline;
pub mod plant;
pub mod sindy;

pub use error::{Error, Result};
