//! Identification of longitudinal stability characteristics from flight-test
//! time histories with Gaussian-process regression.
//!
//! The crate is organised along the processing chain:
//!
//! * [`ingest`] reads telemetry CSV, resamples it and derives `Q̇`;
//! * [`aero`] holds the state vector, atmosphere, the Morelli `C_m` form and
//!   coefficient extraction;
//! * [`gp`] is an exact GP with analytic posterior-mean gradients;
//! * [`trim`] fits trim functions from trim shots;
//! * [`dynamics`] differentiates trained models into stability derivatives
//!   and short-period frequency and damping;
//! * [`synth`] is a 2-DOF simulator with a closed-form oracle;
//! * [`eval`] has the linear baseline and historical comparison tables;
//! * [`pipeline`] wires the steps together for the CLI and tests.

pub mod aero;
pub mod dynamics;
mod error;
pub mod eval;
pub mod gp;
pub mod ingest;
mod linalg;
pub mod pipeline;
pub mod synth;
pub mod trim;

pub use aero::{
    AircraftGeometry, FlightCondition, MorelliCoefficients, StateComponent, StateVector, STATE_DIM,
};
pub use dynamics::{ShortPeriodResult, StabilityDerivatives};
pub use error::{Error, Result};
pub use gp::{FitOptions, GpModel, Kernel, MeanFunction, Standardizer};
pub use ingest::{DerivedFlightSeries, RawFlightSeries};
pub use synth::{ManeuverProfile, TrueLinearModel};
pub use trim::{TrimModel, TrimShot};
