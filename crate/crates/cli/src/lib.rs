//! Command-line front end: experiment specs, the forward/reconstruct/kernels
//! commands and the acceptance suite behind `dsm verify`.

pub mod acceptance;
pub mod exit;
pub mod run;
pub mod spec;
pub mod summary;

pub use spec::{ExperimentSpec, GridSpec};
