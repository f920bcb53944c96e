//! Remaining-time root of the ramp-down segment.
//!
//! On the ramp-down segment the angle-to-go satisfies the depressed cubic
//! `τ³ + pτ + q = 0` in the remaining time `τ`. With three real roots the
//! physical one is the smaller positive root, reached by the `−2π/3` branch
//! of the trigonometric solution.

use core::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicRoot {
    pub tau: f64,
    pub p: f64,
    pub q: f64,
    /// `|τ³ + pτ + q| / max(1, |p|^{3/2}, |q|)` at the returned root (after clamping).
    pub scaled_residual: f64,
    /// Discriminant was non-negative or the root fell outside `[0, tau_max]`.
    pub clamped: bool,
}

impl CubicRoot {
    pub fn residual_scale(p: f64, q: f64) -> f64 {
        1.0f64.max(libm::pow(p.abs(), 1.5)).max(q.abs())
    }
}

#[inline]
fn eval(p: f64, q: f64, tau: f64) -> f64 {
    (tau * tau + p) * tau + q
}

/// Solve `τ³ + pτ + q = 0` for the remaining time on a ramp segment of length `tau_max`.
///
/// Requires `p < 0`; when `4p³ + 27q² ≥ 0` the cosine argument is clamped and the
/// result is flagged.
pub fn solve_cubic_tau(p: f64, q: f64, tau_max: f64) -> CubicRoot {
    let mut clamped = false;
    if !(p < 0.0) || !q.is_finite() {
        return CubicRoot {
            tau: 0.0,
            p,
            q,
            scaled_residual: f64::NAN,
            clamped: true,
        };
    }
    let r = libm::sqrt(-p / 3.0);
    let mut arg = (3.0 * q / (2.0 * p)) * libm::sqrt(-3.0 / p);
    if !(-1.0..=1.0).contains(&arg) {
        // Rounding alone can push |arg| past 1 by a few ulps at the segment ends.
        if arg.abs() > 1.0 + 1e-12 {
            clamped = true;
        }
        arg = arg.clamp(-1.0, 1.0);
    }
    let mut tau = 2.0 * r * libm::cos(libm::acos(arg) / 3.0 - 2.0 * PI / 3.0);

    // One Newton step; kept only if it lowers the residual.
    let slope = 3.0 * tau * tau + p;
    if slope != 0.0 {
        let polished = tau - eval(p, q, tau) / slope;
        if eval(p, q, polished).abs() < eval(p, q, tau).abs() {
            tau = polished;
        }
    }

    let hi = tau_max.max(0.0);
    if tau < 0.0 || tau > hi {
        let excess = if tau < 0.0 { -tau } else { tau - hi };
        if excess > 1e-9 * hi.max(1.0) {
            clamped = true;
        }
        tau = tau.clamp(0.0, hi);
    }

    CubicRoot {
        tau,
        p,
        q,
        scaled_residual: eval(p, q, tau).abs() / CubicRoot::residual_scale(p, q),
        clamped,
    }
}
