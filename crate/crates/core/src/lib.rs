//! Informative path planning for robots sweeping a transect, with a Gaussian
//! process model of the sampled field.
//!
//! The grid has `r` rows and `C` columns; each stage every robot moves one
//! column forward to any row. [`planners::plan_markov`] solves a dynamic
//! program that conditions only on the current column, and [`bounds`]
//! quantifies how much entropy that approximation can lose.

pub mod bench;
pub mod bounds;
pub mod error;
pub mod field_io;
pub mod gp;
pub mod metrics;
pub mod planners;
pub mod transect;

pub use error::{Error, Result};
pub use gp::{CovMatrix, GpModel, Hyperparams, Location, Widths};
pub use planners::{PlanResult, PolicyKind};
pub use transect::{ObservationPath, RobotConfig, TransectGrid};
