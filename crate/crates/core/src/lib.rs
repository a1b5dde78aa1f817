//! Guaranteed-search sweep planning for a line sensor confining evaders in a disk.
//!
//! The crate computes critical sweeper velocities, builds circular shrinking
//! sweep plans with their end game, runs parameter studies, and checks the
//! closed forms against an independent occupancy-grid simulation.

// `!(x > 0.0)` is the NaN-rejecting guard used throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod model;
pub mod oracle;
pub mod par;
pub mod planner;
pub mod report;
pub mod study;
pub mod velocity;
pub mod verify;

pub use error::{Result, SweepError};
pub use model::{CycleRecord, EndGameRecord, SearchParams, SweepPlan};
pub use par::Execution;
