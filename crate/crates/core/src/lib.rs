//! SE_2(3) numerics and log-linear error dynamics for a thrusting spacecraft
//! tracking a reference trajectory under point-mass gravity.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod dynamics;
pub mod error;
pub mod integrate;
pub mod liegroup;
pub mod logerror;

pub use error::{Error, Result};
pub use liegroup::{AlgebraVector, GroupElement, Mat3, Mat5, Mat9, Rotation, Vec3, Vec9};
