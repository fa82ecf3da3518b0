//! Configurable experiments on top of `memvisc`: parameter sweeps, the undamped
//! counterexample, the Laplace-line study and the root-localization suites.
//!
//! A run is `config -> drivers::run -> report::emit`; the `memvisc` binary wraps
//! that pipeline with exit codes.

pub mod catalog;
pub mod config;
pub mod drivers;
pub mod error;
pub mod report;

pub use config::{ExperimentConfig, Kind};
pub use drivers::run;
pub use error::{ExpError, ExpResult};
pub use report::{emit, Report, Table};
