//! Forward-difference partials of `ω_R` and the regulating-rate derivative.

use super::shape::{ProfileInputs, ProfileKind, RateProfile};
use super::ProfileError;
use crate::math::Vec3;

/// Default relative finite-difference step.
pub const DEFAULT_EPSILON: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partials {
    pub omega_r: f64,
    pub d_theta: f64,
    pub d_alpha: f64,
    pub d_omega_max: f64,
}

/// Step used for variable `x`: `ε·|x|`, or `ε` at zero.
#[inline]
pub fn step_for(x: f64, eps: f64) -> f64 {
    if x != 0.0 {
        eps * x.abs()
    } else {
        eps
    }
}

/// `∂ω_R/∂(·) ≈ (ω_R((·) + h) − ω_R) / h`, rebuilding the profile when the
/// perturbed variable shapes it.
pub fn partials(
    inputs: ProfileInputs,
    kind: ProfileKind,
    theta: f64,
    eps: f64,
) -> Result<Partials, ProfileError> {
    if !(eps > 0.0) {
        return Err(ProfileError::NonPositive("epsilon"));
    }
    let base = RateProfile::build(inputs, kind)?;
    let omega_r = base.eval(theta);

    let h = step_for(theta, eps);
    let d_theta = (base.eval(theta + h) - omega_r) / h;

    let h = step_for(inputs.alpha, eps);
    let perturbed = RateProfile::build(
        ProfileInputs {
            alpha: inputs.alpha + h,
            ..inputs
        },
        kind,
    )?;
    let d_alpha = (perturbed.eval(theta) - omega_r) / h;

    let h = step_for(inputs.omega_max, eps);
    let perturbed = RateProfile::build(
        ProfileInputs {
            omega_max: inputs.omega_max + h,
            ..inputs
        },
        kind,
    )?;
    let d_omega_max = (perturbed.eval(theta) - omega_r) / h;

    Ok(Partials {
        omega_r,
        d_theta,
        d_alpha,
        d_omega_max,
    })
}

/// `ω̇_R = (∂θ ω_R θ̇_e + ∂α ω_R α̇_R + ∂ωmax ω_R ω̇_Rmax) ê + ω_R ê̇`.
pub fn omega_r_vec_dot(
    p: &Partials,
    axis: Vec3,
    axis_rate: Vec3,
    theta_rate: f64,
    alpha_rate: f64,
    omega_max_rate: f64,
) -> Vec3 {
    let scalar = p.d_theta * theta_rate + p.d_alpha * alpha_rate + p.d_omega_max * omega_max_rate;
    axis * scalar + axis_rate * p.omega_r
}
