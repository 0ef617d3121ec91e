//! Experiment driver for radionet: versioned configs, reproducible
//! campaigns, calibration of the frozen envelope constants and claim fuzzing.
//!
//! The `radionet` binary is a thin front end over these modules; the
//! acceptance suite uses them directly.

pub mod analyze;
pub mod calibrate;
pub mod campaign;
pub mod cli;
pub mod config;
mod error;
pub mod spec;
pub mod verify;

pub use campaign::{campaign, campaign_records, ResultRow, SummaryLine};
pub use config::{Calibrated, ConfigFile, Profile};
pub use error::{HarnessError, Result};
pub use spec::{ExperimentSpec, NetworkSpec, ProtocolSpec, Seeds};
