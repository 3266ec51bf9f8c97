//! Scenario-driven reproduction of the Molniya formation experiment:
//! dual propagation, gravity-bound verification and closed-loop runs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod elements;
pub mod error;
pub mod plot;
pub mod runs;
pub mod scenario;
pub mod table;

pub use error::{Result, SimError};
pub use runs::{run_bound, run_mode, run_stabilize, run_validate, RunOutput, RunSummary};
pub use scenario::{Mode, Scenario};
