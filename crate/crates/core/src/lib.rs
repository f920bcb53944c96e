#![no_std]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Attitude tracking under slew-rate and torque limits.
//!
//! Quaternions are stored `[v; w]` and compose as `q_{C/A} = q_{C/B} ⊗ q_{B/A}`.
//! All angles are radians and all rates are rad/s.

#[cfg(test)]
extern crate std;

pub mod errgeo;
pub mod math;
pub mod rateprofile;
pub mod controller;
pub mod desired;
pub mod plant;
pub mod scenario;
pub mod staring;
