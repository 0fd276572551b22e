//! Experiment harness for q-ary compressive sensing.
//!
//! Each experiment kind maps to a runner that expands an [`ExperimentSpec`]
//! into independent seeded jobs, executes them (optionally in parallel) and
//! returns a [`Report`] whose CSV rendering is byte-stable across schedules.

pub mod error;
pub mod image;
pub mod runner;
pub mod spec;
pub mod table;

pub use error::{HarnessError, Result};
pub use runner::{run, Report, RunOptions};
pub use spec::{EtaPolicy, ExperimentSpec, Kind};
