//! Configuration, execution, verification and reporting of inexact-oracle
//! experiments.
//!
//! An [`ExperimentConfig`] names an instance, an algorithm, a noise model and
//! a transfer mode. [`run_experiment`] executes it and audits the result,
//! [`verify::verify_trace`] replays a stored trace and re-checks every
//! invariant of the repair, [`sweep::sweep`] varies one parameter, and
//! [`plot::render`] draws sweep results.

pub mod bounds;
pub mod config;
pub mod csv_io;
pub mod demo;
pub mod error;
pub mod experiment;
pub mod plot;
pub mod sweep;
pub mod verify;

pub use config::{ExperimentConfig, GroundSet, TransferMode};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, Experiment, Summary};
