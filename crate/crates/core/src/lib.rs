//! Integrated sensing and communication with coded vortex-wavefront (OAM)
//! transmission from a uniform circular array.
//!
//! The pipeline runs [`echo`] synthesis, slow-time [`decode`], the
//! velocity-compensated EM estimator in [`estimate`] and the
//! sensing-assisted link evaluation in [`comm`]. [`harness`] wires them
//! into the experiments exposed by the command-line tool.

pub mod bessel;
pub mod comm;
pub mod config;
pub mod cube;
pub mod decode;
pub mod echo;
pub mod error;
pub mod estimate;
pub mod harness;
pub mod waveform;

pub use config::{
    derive_quantities, validate_scenario, DerivedQuantities, Scenario, ScenarioWarning, SystemConfig, Target,
};
pub use cube::{Cube, Stage};
pub use error::{Error, Result};
pub use estimate::{EmOptions, Estimator, EstimatorKind, ParameterEstimate, SearchGrids};
pub use num_complex::Complex64;
