//! Sliding surface, finite-time control law, torque saturation and the
//! per-cycle command pipeline.

use core::fmt;

use crate::desired::DesiredSample;
use crate::errgeo::{error_state, ErrorState, DEFAULT_AXIS_GUARD};
use crate::math::{Quaternion, Vec3};
use crate::plant::SatelliteParams;
use crate::rateprofile::{
    alpha_r_dot, feedforward_norm, omega_r_max, omega_r_max_dot, omega_r_vec_dot, partials,
    AccelModel, AlphaRateTerms, CubicRoot, ProfileError, ProfileInputs, ProfileKind, RateProfile,
    Segment, DEFAULT_EPSILON,
};

/// `‖s‖` at or below which `ŝ` is taken as zero.
pub const DEFAULT_S_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlParams {
    /// Robust gain, set to the disturbance bound [N·m].
    pub d_max: f64,
    /// Deceleration margin `γ ∈ (0, 1]`.
    pub gamma: f64,
    /// Acceleration-blend threshold [rad].
    pub eta: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub tau1: f64,
    pub tau3: f64,
    pub kind: ProfileKind,
    /// Relative finite-difference step for the profile partials.
    pub epsilon: f64,
    pub s_guard: f64,
    pub axis_guard: f64,
}

impl Default for ControlParams {
    fn default() -> Self {
        ControlParams {
            d_max: 2.0,
            gamma: 0.99,
            eta: 0.05f64.to_radians(),
            beta1: 2.0,
            beta2: 0.5,
            tau1: 1.0,
            tau3: 1.0,
            kind: ProfileKind::Modified,
            epsilon: DEFAULT_EPSILON,
            s_guard: DEFAULT_S_GUARD,
            axis_guard: DEFAULT_AXIS_GUARD,
        }
    }
}

impl ControlParams {
    pub fn validate(&self) -> Result<(), ControlError> {
        let positive = [
            ("beta1", self.beta1),
            ("tau1", self.tau1),
            ("tau3", self.tau3),
            ("eta", self.eta),
            ("epsilon", self.epsilon),
            ("gamma", self.gamma),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ControlError::InvalidParameter {
                    name,
                    requirement: "must be finite and > 0",
                });
            }
        }
        if !(self.beta2 > 0.0 && self.beta2 < 1.0) {
            return Err(ControlError::InvalidParameter {
                name: "beta2",
                requirement: "must lie in (0, 1)",
            });
        }
        if !(self.gamma <= 1.0) {
            return Err(ControlError::InvalidParameter {
                name: "gamma",
                requirement: "must lie in (0, 1]",
            });
        }
        for (name, v) in [
            ("d_max", self.d_max),
            ("s_guard", self.s_guard),
            ("axis_guard", self.axis_guard),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ControlError::InvalidParameter {
                    name,
                    requirement: "must be finite and >= 0",
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControlError {
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
    },
    Profile(ProfileError),
    /// A non-finite value appeared; `stage` names where.
    Fault {
        stage: &'static str,
        theta_e: f64,
        omega_b: Vec3,
    },
}

impl fmt::Display for ControlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlError::InvalidParameter { name, requirement } => {
                write!(f, "invalid argument: {name} {requirement}")
            }
            ControlError::Profile(e) => write!(f, "{e}"),
            ControlError::Fault {
                stage,
                theta_e,
                omega_b,
            } => write!(
                f,
                "controller fault: non-finite value in {stage} (theta_e = {theta_e:e}, omega_B = [{:e}, {:e}, {:e}])",
                omega_b.x, omega_b.y, omega_b.z
            ),
        }
    }
}

impl core::error::Error for ControlError {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            ControlError::Profile(e) => Some(e),
            _ => None,
        }
    }
}

impl From<ProfileError> for ControlError {
    fn from(e: ProfileError) -> Self {
        ControlError::Profile(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ControlFlags {
    pub singular: bool,
    pub saturated: bool,
    pub budget_exhausted: bool,
    /// Ramp-down cubic root had to be clamped.
    pub cubic_clamped: bool,
    /// The `ω_Rmax` square root vanished; its rate was clamped to zero.
    pub rate_cap_degenerate: bool,
}

impl ControlFlags {
    pub const SINGULAR: u32 = 1;
    pub const SATURATED: u32 = 2;
    pub const BUDGET_EXHAUSTED: u32 = 4;
    pub const CUBIC_CLAMPED: u32 = 8;
    pub const RATE_CAP_DEGENERATE: u32 = 16;

    pub fn bits(&self) -> u32 {
        let mut b = 0;
        if self.singular {
            b |= Self::SINGULAR;
        }
        if self.saturated {
            b |= Self::SATURATED;
        }
        if self.budget_exhausted {
            b |= Self::BUDGET_EXHAUSTED;
        }
        if self.cubic_clamped {
            b |= Self::CUBIC_CLAMPED;
        }
        if self.rate_cap_degenerate {
            b |= Self::RATE_CAP_DEGENERATE;
        }
        b
    }

    pub fn from_bits(b: u32) -> Self {
        ControlFlags {
            singular: b & Self::SINGULAR != 0,
            saturated: b & Self::SATURATED != 0,
            budget_exhausted: b & Self::BUDGET_EXHAUSTED != 0,
            cubic_clamped: b & Self::CUBIC_CLAMPED != 0,
            rate_cap_degenerate: b & Self::RATE_CAP_DEGENERATE != 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub u_cmd: Vec3,
    pub u_raw: Vec3,
    pub s: Vec3,
    pub error: ErrorState,
    pub omega_d_in_b: Vec3,
    pub omega_d_dot_in_b: Vec3,
    pub omega_r: f64,
    pub omega_r_dot: Vec3,
    pub accel: AccelModel,
    pub alpha_r_dot: f64,
    pub omega_r_max: f64,
    pub omega_r_max_dot: f64,
    pub feedforward: f64,
    pub feedforward_rate: f64,
    pub segment: Segment,
    /// Ramp-down root diagnostics, when that segment was evaluated.
    pub cubic: Option<CubicRoot>,
    pub flags: ControlFlags,
    /// `½ sᵀ J s`.
    pub lyapunov: f64,
    /// `V̇ + β1 λ_min ‖s‖^(β2+1)` under the applied torque with zero disturbance.
    /// Non-positive whenever the finite-time decrease condition holds.
    pub lyapunov_margin: f64,
}

/// State carried from one control cycle to the next.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CycleMemory {
    pub prev_feedforward: Option<f64>,
}

/// `s = ω_D + ω_R − ω_B`, all body components.
pub fn sliding_surface(omega_d_in_b: Vec3, omega_r: Vec3, omega_b: Vec3) -> Vec3 {
    omega_d_in_b + omega_r - omega_b
}

/// Unsaturated control torque.
#[allow(clippy::too_many_arguments)]
pub fn control_law(
    s: Vec3,
    omega_d_dot_in_b: Vec3,
    omega_r_dot: Vec3,
    omega_b: Vec3,
    sat: &SatelliteParams,
    params: &ControlParams,
) -> Vec3 {
    let n = s.norm();
    let s_hat = if n > params.s_guard { s / n } else { Vec3::ZERO };
    let j = sat.inertia();
    let accel = omega_d_dot_in_b + omega_r_dot + s_hat * (params.beta1 * libm::pow(n, params.beta2));
    j * accel + s_hat * params.d_max + omega_b.cross(j * omega_b)
}

/// Scale `u` onto the ball of radius `u_max`, keeping its direction.
pub fn saturate(u: Vec3, u_max: f64) -> (Vec3, bool) {
    let n = u.norm();
    if n <= u_max {
        (u, false)
    } else {
        let mut scale = u_max / n;
        // Rounding in the rescale may land a few ulps above the bound.
        while (u * scale).norm() > u_max {
            scale = scale.next_down();
        }
        (u * scale, true)
    }
}

fn check(v: Vec3, stage: &'static str, es: &ErrorState, omega_b: Vec3) -> Result<(), ControlError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ControlError::Fault {
            stage,
            theta_e: es.theta_e,
            omega_b,
        })
    }
}

/// One controller update.
///
/// `period` is the control period used for the backward difference of the
/// feed-forward norm. Identical arguments give bit-identical results.
pub fn compute_command(
    q_b: &Quaternion,
    omega_b: Vec3,
    desired: &DesiredSample,
    params: &ControlParams,
    sat: &SatelliteParams,
    period: f64,
    memory: &CycleMemory,
) -> Result<(ControlOutput, CycleMemory), ControlError> {
    let es = error_state(&desired.q_d, q_b, desired.omega_d, omega_b, params.axis_guard);
    let t_bd = es.q_e.to_rotation().transpose();
    let omega_d_in_b = t_bd.apply(desired.omega_d);
    let omega_d_dot_in_b = t_bd.apply(desired.omega_d_dot);
    check(es.omega_e, "error state", &es, omega_b)?;

    let j = sat.inertia();
    let ff = feedforward_norm(j, omega_d_dot_in_b, omega_b);
    let ff_rate = match memory.prev_feedforward {
        Some(prev) if period > 0.0 => (ff - prev) / period,
        _ => 0.0,
    };
    let accel = AccelModel::evaluate(
        es.axis,
        es.theta_e,
        params.eta,
        params.gamma,
        j,
        sat.lambda_max(),
        sat.u_max(),
        ff,
    )?;
    let alpha_rate = if accel.budget_exhausted {
        0.0
    } else {
        alpha_r_dot(
            &AlphaRateTerms {
                theta_e: es.theta_e,
                theta_e_rate: es.theta_e_rate,
                eta: params.eta,
                alpha_max: accel.alpha_max,
                alpha_min: accel.alpha_min,
                axis: es.axis,
                axis_rate: es.axis_rate,
                gamma: params.gamma,
                feedforward_rate: ff_rate,
            },
            j,
        )
    };

    let w_cap = omega_r_max(omega_d_in_b, es.axis, sat.omega_max())?;
    let (w_cap_rate, cap_degenerate) = omega_r_max_dot(
        omega_d_in_b,
        omega_d_dot_in_b,
        es.axis,
        es.axis_rate,
        sat.omega_max(),
    );

    let inputs = ProfileInputs {
        alpha: accel.alpha_r,
        tau1: params.tau1,
        tau3: params.tau3,
        omega_max: w_cap,
    };
    let (omega_r, omega_r_dot, segment, cubic) = if es.singular {
        (0.0, Vec3::ZERO, Segment::RampUp, None)
    } else {
        let profile = RateProfile::build(inputs, params.kind)?;
        let ev = profile.eval_detailed(es.theta_e);
        let p = partials(inputs, params.kind, es.theta_e, params.epsilon)?;
        let rate = omega_r_vec_dot(
            &p,
            es.axis,
            es.axis_rate,
            es.theta_e_rate,
            alpha_rate,
            w_cap_rate,
        );
        (ev.omega, rate, ev.segment, ev.cubic)
    };
    check(omega_r_dot, "regulating-rate derivative", &es, omega_b)?;

    let s = sliding_surface(omega_d_in_b, es.axis * omega_r, omega_b);
    let u_raw = control_law(s, omega_d_dot_in_b, omega_r_dot, omega_b, sat, params);
    check(u_raw, "control law", &es, omega_b)?;
    let (u_cmd, saturated) = saturate(u_raw, sat.u_max());

    let js = j * s;
    let lyapunov = 0.5 * s.dot(js);
    // J ṡ = J(ω̇_D + ω̇_R) − (u − ω × Jω) with d = 0.
    let j_s_dot = j * (omega_d_dot_in_b + omega_r_dot) - (u_cmd - omega_b.cross(j * omega_b));
    let v_dot = s.dot(j_s_dot);
    let lyapunov_margin = v_dot + params.beta1 * sat.lambda_min() * libm::pow(s.norm(), params.beta2 + 1.0);

    let flags = ControlFlags {
        singular: es.singular,
        saturated,
        budget_exhausted: accel.budget_exhausted,
        cubic_clamped: cubic.is_some_and(|c| c.clamped),
        rate_cap_degenerate: cap_degenerate,
    };
    Ok((
        ControlOutput {
            u_cmd,
            u_raw,
            s,
            error: es,
            omega_d_in_b,
            omega_d_dot_in_b,
            omega_r,
            omega_r_dot,
            accel,
            alpha_r_dot: alpha_rate,
            omega_r_max: w_cap,
            omega_r_max_dot: w_cap_rate,
            feedforward: ff,
            feedforward_rate: ff_rate,
            segment,
            cubic,
            flags,
            lyapunov,
            lyapunov_margin,
        },
        CycleMemory {
            prev_feedforward: Some(ff),
        },
    ))
}
