//! Exact Gaussian-process regression on the flight state.
//!
//! Inputs are z-scored per dimension before the kernel sees them; the mean
//! function always works in raw units. Posterior-mean gradients are analytic
//! and chained back through the standardization.

mod kernel;
mod mean;
mod model;
mod select;
mod standardize;

pub use kernel::{Kernel, ASIN_EPS};
pub use mean::MeanFunction;
pub use model::{FitOptions, GpModel, JITTER};
pub use select::{select, GridPoint, GridSpec, Selection};
pub use standardize::Standardizer;
