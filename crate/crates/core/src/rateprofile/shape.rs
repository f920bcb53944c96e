//! Regulating-rate profile `ω_R(θ_e)`.
//!
//! The profile is the jerk-limited ramp-up of a rate that starts at zero and
//! saturates at `ω_Rmax`, read as a function of the angle covered. Ramp
//! segments of duration `τ1`, `τ3` bracket an optional constant-acceleration
//! plateau `τ2`. When the ramps alone overshoot `ω_Rmax` the acceleration is
//! rescaled so the plateau vanishes. The modified variant replaces the first
//! ramp with a linear `ω_R = √(α/θ1)·θ_e` law.

use super::cubic::{solve_cubic_tau, CubicRoot};
use super::ProfileError;

/// User-facing profile choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProfileKind {
    Trapezoid,
    Modified,
}

impl ProfileKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProfileKind::Trapezoid => "trapezoid",
            ProfileKind::Modified => "modified",
        }
    }

    pub fn parse(s: &str) -> Option<ProfileKind> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("trapezoid") || s.eq_ignore_ascii_case("trapezoidal") {
            Some(ProfileKind::Trapezoid)
        } else if s.eq_ignore_ascii_case("modified") {
            Some(ProfileKind::Modified)
        } else {
            None
        }
    }
}

/// Shape of a built profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileShape {
    /// Ramp, plateau (`τ2 ≥ 0`), ramp.
    Trapezoid,
    /// No plateau; acceleration and ramp durations rescaled.
    Collapsed,
    /// Linear first segment. `collapsed` records whether the ramps were rescaled first.
    Modified { collapsed: bool },
}

/// Segment that produced an evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Segment {
    RampUp = 1,
    Plateau = 2,
    RampDown = 3,
    Cruise = 4,
}

/// Raw inputs a profile is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileInputs {
    /// Regulating acceleration `α_R` [rad/s²].
    pub alpha: f64,
    pub tau1: f64,
    pub tau3: f64,
    /// `ω_Rmax` [rad/s].
    pub omega_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateProfile {
    pub shape: ProfileShape,
    /// Effective acceleration (`α_R`, or `α_R′` when collapsed).
    pub alpha: f64,
    pub tau1: f64,
    /// Plateau duration, zero when collapsed.
    pub tau2: f64,
    pub tau3: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub theta1: f64,
    /// End of the plateau; equals `theta1` for a collapsed profile.
    pub theta2: f64,
    /// Angle at which the profile reaches `omega_max`.
    pub theta3: f64,
    pub omega_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileEval {
    pub omega: f64,
    pub segment: Segment,
    /// Present for ramp-down evaluations.
    pub cubic: Option<CubicRoot>,
}

impl RateProfile {
    pub fn build(inputs: ProfileInputs, kind: ProfileKind) -> Result<RateProfile, ProfileError> {
        let ProfileInputs {
            alpha,
            tau1,
            tau3,
            omega_max,
        } = inputs;
        for (name, v) in [
            ("alpha_R", alpha),
            ("tau1", tau1),
            ("tau3", tau3),
            ("omega_Rmax", omega_max),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ProfileError::NonPositive(name));
            }
        }

        let omega1 = 0.5 * alpha * tau1;
        let omega2 = omega_max - 0.5 * alpha * tau3;
        let tau2 = (omega2 - omega1) / alpha;

        let collapsed = tau2 < 0.0;
        let (a, t1, t3) = if collapsed {
            let a = libm::sqrt(2.0 * alpha * omega_max / (tau1 + tau3));
            (a, a / alpha * tau1, a / alpha * tau3)
        } else {
            (alpha, tau1, tau3)
        };

        let theta1 = a * t1 * t1 / 6.0;
        let (shape, omega1) = match kind {
            ProfileKind::Trapezoid if collapsed => (ProfileShape::Collapsed, 0.5 * a * t1),
            ProfileKind::Trapezoid => (ProfileShape::Trapezoid, 0.5 * a * t1),
            ProfileKind::Modified => (ProfileShape::Modified { collapsed }, libm::sqrt(a * theta1)),
        };
        let omega2 = omega_max - 0.5 * a * t3;
        let tau2 = match shape {
            ProfileShape::Collapsed => 0.0,
            _ => ((omega2 - omega1) / a).max(0.0),
        };
        let theta2 = theta1 + omega1 * tau2 + 0.5 * a * tau2 * tau2;
        let theta3 = theta2 + omega2 * t3 + a * t3 * t3 / 3.0;

        Ok(RateProfile {
            shape,
            alpha: a,
            tau1: t1,
            tau2,
            tau3: t3,
            omega1,
            omega2,
            theta1,
            theta2,
            theta3,
            omega_max,
        })
    }

    /// Time to traverse the whole profile from rest. Infinite for the modified
    /// shape, whose linear first segment only converges exponentially.
    pub fn duration(&self) -> f64 {
        match self.shape {
            ProfileShape::Modified { .. } => f64::INFINITY,
            _ => self.tau1 + self.tau2 + self.tau3,
        }
    }

    /// Duration of the finite part of the profile (ramps plus plateau).
    pub fn segment_time(&self) -> f64 {
        self.tau1 + self.tau2 + self.tau3
    }

    pub fn is_modified(&self) -> bool {
        matches!(self.shape, ProfileShape::Modified { .. })
    }

    /// Slope of the linear first segment of a modified profile.
    pub fn linear_gain(&self) -> f64 {
        libm::sqrt(self.alpha / self.theta1)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.eval_detailed(theta).omega
    }

    pub fn eval_detailed(&self, theta: f64) -> ProfileEval {
        let theta = if theta > 0.0 { theta } else { 0.0 };
        let a = self.alpha;
        if theta < self.theta1 {
            let omega = if self.is_modified() {
                self.linear_gain() * theta
            } else {
                let tau = libm::cbrt(6.0 * theta * self.tau1 / a);
                0.5 * a / self.tau1 * tau * tau
            };
            ProfileEval {
                omega,
                segment: Segment::RampUp,
                cubic: None,
            }
        } else if theta < self.theta2 {
            // ω1 + α τ with τ the positive root of ½ατ² + ω1 τ − (θ − θ1) = 0.
            let omega = libm::sqrt(self.omega1 * self.omega1 + 2.0 * a * (theta - self.theta1));
            ProfileEval {
                omega,
                segment: Segment::Plateau,
                cubic: None,
            }
        } else if theta < self.theta3 {
            let p = -6.0 * self.omega_max * self.tau3 / a;
            let q = 6.0 * self.tau3 * (self.theta3 - theta) / a;
            let root = solve_cubic_tau(p, q, self.tau3);
            let omega = self.omega_max - 0.5 * a / self.tau3 * root.tau * root.tau;
            ProfileEval {
                omega,
                segment: Segment::RampDown,
                cubic: Some(root),
            }
        } else {
            ProfileEval {
                omega: self.omega_max,
                segment: Segment::Cruise,
                cubic: None,
            }
        }
    }

    /// Segment boundary angles in increasing order (`θ1, θ2, θ3`, with `θ2`
    /// omitted for a collapsed profile).
    pub fn boundaries(&self) -> ([f64; 3], usize) {
        match self.shape {
            ProfileShape::Collapsed => ([self.theta1, self.theta3, self.theta3], 2),
            _ => ([self.theta1, self.theta2, self.theta3], 3),
        }
    }
}
