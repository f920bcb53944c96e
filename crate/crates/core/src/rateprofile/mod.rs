//! Shaping of the regulating rate `ω_R`: acceleration limits, the slew-rate
//! cap, the closed-form profile and its derivatives.

mod accel;
mod cubic;
mod limits;
mod partials;
mod shape;

use core::fmt;

pub use accel::{
    alpha_max, alpha_min, alpha_r, alpha_r_dot, feedforward_norm, sigma, AccelModel,
    AlphaRateTerms,
};
pub use cubic::{solve_cubic_tau, CubicRoot};
pub use limits::{omega_r_max, omega_r_max_dot};
pub use partials::{omega_r_vec_dot, partials, step_for, Partials, DEFAULT_EPSILON};
pub use shape::{
    ProfileEval, ProfileInputs, ProfileKind, ProfileShape, RateProfile, Segment,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileError {
    /// A parameter that must be strictly positive was not.
    NonPositive(&'static str),
    /// A function defined only for non-negative input received a negative one.
    NegativeArgument(&'static str),
    /// Feed-forward demand consumed the whole torque budget.
    BudgetExhausted { budget: f64 },
    /// `‖ω_D‖ ≥ ω_max`: the desired frame cannot be followed.
    Infeasible { omega_d: f64, omega_max: f64 },
}

impl fmt::Display for ProfileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileError::NonPositive(name) => write!(f, "invalid argument: {name} must be > 0"),
            ProfileError::NegativeArgument(name) => {
                write!(f, "invalid argument: {name} requires a non-negative input")
            }
            ProfileError::BudgetExhausted { budget } => write!(
                f,
                "saturated feed-forward: remaining torque budget {budget:.6e} N·m"
            ),
            ProfileError::Infeasible { omega_d, omega_max } => write!(
                f,
                "infeasible command: |omega_D| = {omega_d:.6e} rad/s >= omega_max = {omega_max:.6e} rad/s"
            ),
        }
    }
}

impl core::error::Error for ProfileError {}
