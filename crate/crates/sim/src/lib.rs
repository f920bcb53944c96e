//! Simulation harness around `slewctl-core`: run configuration, telemetry
//! and desired-frame CSV formats, slew-time sweeps, the profile ODE oracle
//! and the `slewctl` command line.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod desired_csv;
pub mod error;
pub mod oracle;
pub mod run;
pub mod sweep;
pub mod telemetry;

/// 17 significant digits, enough to read every `f64` back exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
