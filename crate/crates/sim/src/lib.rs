//! Scenario runner, telemetry logging, energy accounting and the acceptance
//! checks.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod energy;
pub mod error;
pub mod replay;
pub mod runner;
pub mod scenario;
pub mod telemetry;
pub mod verify;

pub use energy::{energy_report, EnergyReport, Segment};
pub use error::{Result, SimError};
pub use runner::{run_scenario, RunLog, Simulation};
pub use scenario::{builtin, Scenario, BUILTIN};
pub use telemetry::{read_csv, write_csv, Record};
pub use verify::{run_all, Check};
