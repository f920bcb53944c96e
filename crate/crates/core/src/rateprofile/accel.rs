//! Eigen-axis acceleration limits and the blended regulating acceleration.

use super::ProfileError;
use crate::math::{Mat3, Vec3};

/// Linear saturation: `x/η` below `η`, `1` above.
pub fn sigma(x: f64, eta: f64) -> Result<f64, ProfileError> {
    if !(x >= 0.0) {
        return Err(ProfileError::NegativeArgument("sigma"));
    }
    if !(eta > 0.0) {
        return Err(ProfileError::NonPositive("eta"));
    }
    Ok(if x < eta { x / eta } else { 1.0 })
}

/// Torque spent on feed-forward: `‖J ω̇_D‖ + ‖ω_B × J ω_B‖`.
pub fn feedforward_norm(inertia: &Mat3, omega_d_dot_in_b: Vec3, omega_b: Vec3) -> f64 {
    (inertia * omega_d_dot_in_b).norm() + omega_b.cross(inertia * omega_b).norm()
}

/// Acceleration available about `axis`: `γ (u_max − ff) / ‖J ê‖`.
pub fn alpha_max(
    axis: Vec3,
    inertia: &Mat3,
    u_max: f64,
    omega_d_dot_in_b: Vec3,
    omega_b: Vec3,
    gamma: f64,
) -> Result<f64, ProfileError> {
    let budget = u_max - feedforward_norm(inertia, omega_d_dot_in_b, omega_b);
    if !(budget > 0.0) {
        return Err(ProfileError::BudgetExhausted { budget });
    }
    Ok(gamma * budget / (inertia * axis).norm())
}

/// Smallest `alpha_max` over all axes, attained along the top singular direction of `J`.
pub fn alpha_min(
    inertia_sigma_max: f64,
    u_max: f64,
    feedforward: f64,
    gamma: f64,
) -> Result<f64, ProfileError> {
    let budget = u_max - feedforward;
    if !(budget > 0.0) {
        return Err(ProfileError::BudgetExhausted { budget });
    }
    Ok(gamma * budget / inertia_sigma_max)
}

/// `(1 − σ) α_min + σ α_max` with `σ = σ(θ_e; η)`.
pub fn alpha_r(theta_e: f64, eta: f64, alpha_min: f64, alpha_max: f64) -> Result<f64, ProfileError> {
    let s = sigma(theta_e, eta)?;
    Ok((1.0 - s) * alpha_min + s * alpha_max)
}

/// Inputs to [`alpha_r_dot`].
#[derive(Debug, Clone, Copy)]
pub struct AlphaRateTerms {
    pub theta_e: f64,
    pub theta_e_rate: f64,
    pub eta: f64,
    pub alpha_max: f64,
    pub alpha_min: f64,
    pub axis: Vec3,
    pub axis_rate: Vec3,
    pub gamma: f64,
    /// Time derivative of [`feedforward_norm`], supplied by the caller.
    pub feedforward_rate: f64,
}

/// Rate of the regulating acceleration.
///
/// The blend term `(θ̇_e/η)(α_max − α_min)` is active only below `η`; the
/// one-sided derivative from above (zero) is used at `θ_e = η`.
pub fn alpha_r_dot(t: &AlphaRateTerms, inertia: &Mat3) -> f64 {
    let s = if t.theta_e < t.eta { t.theta_e / t.eta } else { 1.0 };
    let blend = if t.theta_e < t.eta {
        t.theta_e_rate / t.eta * (t.alpha_max - t.alpha_min)
    } else {
        0.0
    };
    let j_e = inertia * t.axis;
    let j_norm = j_e.norm();
    if j_norm == 0.0 {
        return blend;
    }
    let axis_term = -s * t.alpha_max / (j_norm * j_norm) * j_e.dot(inertia * t.axis_rate);
    let ff_term = -s * t.gamma / j_norm * t.feedforward_rate;
    blend + axis_term + ff_term
}

/// Per-cycle acceleration quantities with the budget-exhaustion floor applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelModel {
    pub alpha_max: f64,
    pub alpha_min: f64,
    pub alpha_r: f64,
    pub sigma: f64,
    /// Feed-forward demand left less than the floor; limits were floored.
    pub budget_exhausted: bool,
}

impl AccelModel {
    /// Fraction of the zero-feed-forward `α_min` used as a floor.
    pub const FLOOR_FRACTION: f64 = 0.1;

    /// Evaluate the limits. A zero `axis` (singular eigen-axis) falls back to `α_min`.
    #[allow(clippy::too_many_arguments)]
    pub fn evaluate(
        axis: Vec3,
        theta_e: f64,
        eta: f64,
        gamma: f64,
        inertia: &Mat3,
        inertia_sigma_max: f64,
        u_max: f64,
        feedforward: f64,
    ) -> Result<AccelModel, ProfileError> {
        let floor = Self::FLOOR_FRACTION * gamma * u_max / inertia_sigma_max;
        let budget = u_max - feedforward;
        let mut exhausted = false;
        let alpha_min = match alpha_min(inertia_sigma_max, u_max, feedforward, gamma) {
            Ok(a) if a >= floor => a,
            _ => {
                exhausted = true;
                floor
            }
        };
        let j_norm = (inertia * axis).norm();
        let alpha_max = if axis == Vec3::ZERO || j_norm == 0.0 {
            alpha_min
        } else if budget > 0.0 {
            let a = gamma * budget / j_norm;
            if a < floor {
                exhausted = true;
                floor
            } else {
                a
            }
        } else {
            exhausted = true;
            floor
        };
        let s = sigma(theta_e, eta)?;
        Ok(AccelModel {
            alpha_max,
            alpha_min,
            alpha_r: (1.0 - s) * alpha_min + s * alpha_max,
            sigma: s,
            budget_exhausted: exhausted,
        })
    }
}
