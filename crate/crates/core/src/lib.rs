//! Estimation of the H0 superlevel-set persistence diagram of a multivariate
//! density from samples, and of the number, locations and heights of its modes.
//!
//! The pipeline bins samples into a histogram on the regular grid over
//! `[0,1]^d`, thickens the histogram with a Chebyshev max-dilation to recover
//! the connectivity of irregular superlevel sets, and reads modes off the
//! persistence diagram of the dilated field: births are local-maximum heights,
//! birth cells localize the maxima, and a penalized threshold separates
//! significant classes from sampling noise.
//!
//! The crate is `no_std`-compatible (with `alloc`); disable the default `std`
//! feature to use it in that configuration. IO, file formats and the command
//! line live in the companion `cresta-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod density;
pub mod error;
pub mod grid;
mod math;
pub mod metrics;
pub mod modes;
pub mod persistence;
pub mod rng;

pub use density::{DensityFamily, DensitySpec, OracleDiagram, Preset};
pub use error::Error;
pub use grid::{dilation_radius, CellField, GridSpec, SampleSet};
pub use metrics::{bottleneck, hausdorff, matching_distance, truncate, ModeSet};
pub use modes::{
    calibrate_h, estimate_modes_adaptive, estimate_modes_known_l, risk, select_l, Calibration,
    EstimatorConfig, Mode, ModeEstimate,
};
pub use persistence::{
    brute_force_diagram, estimate_diagram, superlevel_diagram, PersistenceDiagram,
    PersistencePoint,
};

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
