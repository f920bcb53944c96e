//! Time-domain oracle for the regulating-rate profile.
//!
//! The profile is regenerated from its jerk schedule: the acceleration ramps
//! up over `τ1`, holds for `τ2` and ramps down over `τ3`, and `(θ, ω)` is
//! integrated with RK4 starting from rest. `ω` at a given angle is found by
//! bisection on time. The linear segment of the modified profile, which
//! never starts from rest, is integrated backward in time from its junction
//! with the plateau using `ω̇ = kω`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use slewctl_core::rateprofile::{ProfileError, ProfileInputs, ProfileKind, ProfileShape, RateProfile};

/// State at the start of a forward segment.
#[derive(Debug, Clone, Copy)]
struct Knot {
    theta: f64,
    omega: f64,
    duration: f64,
    /// Acceleration at the segment start and its constant rate of change.
    accel: f64,
    jerk: f64,
}

#[derive(Debug, Clone)]
pub struct OdeProfile {
    knots: Vec<Knot>,
    theta_end: f64,
    omega_max: f64,
    /// Backward trajectory `(θ, ω)` of the linear segment, `θ` decreasing.
    linear: Option<Vec<(f64, f64)>>,
    linear_gain: f64,
    pub collapsed: bool,
}

/// One RK4 step of `θ̇ = ω`, `ω̇ = a + j·t` from local time 0 to `h`.
fn rk4_poly(theta: f64, omega: f64, a: f64, j: f64, h: f64) -> (f64, f64) {
    let acc = |t: f64| a + j * t;
    let (k1t, k1w) = (omega, acc(0.0));
    let (k2t, k2w) = (omega + 0.5 * h * k1w, acc(0.5 * h));
    let (k3t, k3w) = (omega + 0.5 * h * k2w, acc(0.5 * h));
    let (k4t, k4w) = (omega + h * k3w, acc(h));
    (
        theta + h / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t),
        omega + h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w),
    )
}

/// One backward-time RK4 step of `θ̇ = ω`, `ω̇ = kω`.
fn rk4_linear_back(theta: f64, omega: f64, k: f64, h: f64) -> (f64, f64) {
    let f = |_t: f64, w: f64| (-w, -k * w);
    let (k1t, k1w) = f(theta, omega);
    let (k2t, k2w) = f(theta + 0.5 * h * k1t, omega + 0.5 * h * k1w);
    let (k3t, k3w) = f(theta + 0.5 * h * k2t, omega + 0.5 * h * k2w);
    let (k4t, k4w) = f(theta + h * k3t, omega + h * k3w);
    (
        theta + h / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t),
        omega + h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w),
    )
}

/// Smallest `s` in `[0, h]` with `f(s) ≥ target`, for `f` non-decreasing.
fn bisect<F: Fn(f64) -> f64>(f: F, target: f64, h: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, h);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl OdeProfile {
    /// Stop the backward linear table once `θ` falls below this fraction of its start.
    const LINEAR_FLOOR: f64 = 1e-10;
    /// Backward step as a fraction of the linear time constant.
    const LINEAR_STEP: f64 = 0.01;

    pub fn new(inputs: ProfileInputs, kind: ProfileKind) -> Result<OdeProfile, ProfileError> {
        let ProfileInputs {
            alpha,
            tau1,
            tau3,
            omega_max,
        } = inputs;
        for (name, v) in [("alpha_R", alpha), ("tau1", tau1), ("tau3", tau3), ("omega_Rmax", omega_max)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ProfileError::NonPositive(name));
            }
        }
        // Plateau length needed to reach omega_max after both ramps.
        let plateau = (omega_max - 0.5 * alpha * (tau1 + tau3)) / alpha;
        let collapsed = plateau < 0.0;
        let (a, t1, t3) = if collapsed {
            // Scale the acceleration so the two ramps alone add up to omega_max.
            let a = (2.0 * alpha * omega_max / (tau1 + tau3)).sqrt();
            (a, tau1 * a / alpha, tau3 * a / alpha)
        } else {
            (alpha, tau1, tau3)
        };

        // Ramp-up from rest.
        let (th1, w1) = rk4_poly(0.0, 0.0, 0.0, a / t1, t1);
        let ramp_up = Knot {
            theta: 0.0,
            omega: 0.0,
            duration: t1,
            accel: 0.0,
            jerk: a / t1,
        };
        let (start, linear, gain) = match kind {
            ProfileKind::Trapezoid => ((th1, w1), None, 0.0),
            ProfileKind::Modified => {
                // Linear law through (θ1, √(α θ1)); its acceleration kω equals α there.
                let w1m = (a * th1).sqrt();
                let k = w1m / th1;
                let h = Self::LINEAR_STEP / k;
                let mut table = vec![(th1, w1m)];
                let (mut th, mut w) = (th1, w1m);
                while th > Self::LINEAR_FLOOR * th1 {
                    (th, w) = rk4_linear_back(th, w, k, h);
                    table.push((th, w));
                }
                ((th1, w1m), Some(table), k)
            }
        };
        // Plateau: whatever constant-acceleration time is left before the ramp-down.
        let w2 = omega_max - 0.5 * a * t3;
        let t2 = ((w2 - start.1) / a).max(0.0);
        let mut knots = Vec::new();
        if kind == ProfileKind::Trapezoid {
            knots.push(ramp_up);
        }
        let mut state = start;
        if t2 > 0.0 {
            knots.push(Knot {
                theta: state.0,
                omega: state.1,
                duration: t2,
                accel: a,
                jerk: 0.0,
            });
            state = rk4_poly(state.0, state.1, a, 0.0, t2);
        }
        knots.push(Knot {
            theta: state.0,
            omega: state.1,
            duration: t3,
            accel: a,
            jerk: -a / t3,
        });
        let (theta_end, _) = rk4_poly(state.0, state.1, a, -a / t3, t3);
        Ok(OdeProfile {
            knots,
            theta_end,
            omega_max,
            linear,
            linear_gain: gain,
            collapsed,
        })
    }

    /// Angle at which the rate reaches `omega_max`.
    pub fn theta_end(&self) -> f64 {
        self.theta_end
    }

    pub fn omega(&self, theta: f64) -> f64 {
        if !(theta > 0.0) {
            return 0.0;
        }
        if theta >= self.theta_end {
            return self.omega_max;
        }
        let first = self.knots[0].theta;
        if theta < first {
            return self.linear_omega(theta);
        }
        let knot = self
            .knots
            .iter()
            .rev()
            .find(|k| k.theta <= theta)
            .expect("first knot starts at or below theta");
        let tau = bisect(
            |s| rk4_poly(knot.theta, knot.omega, knot.accel, knot.jerk, s).0,
            theta,
            knot.duration,
        );
        rk4_poly(knot.theta, knot.omega, knot.accel, knot.jerk, tau).1
    }

    fn linear_omega(&self, theta: f64) -> f64 {
        let table = self.linear.as_ref().expect("only the linear segment starts above zero");
        // First backward sample at or below theta.
        let i = table.partition_point(|&(th, _)| th > theta);
        if i >= table.len() {
            let (th, w) = table[table.len() - 1];
            return w * theta / th;
        }
        if i == 0 {
            return table[0].1;
        }
        let (th, w) = table[i - 1];
        let h = Self::LINEAR_STEP / self.linear_gain;
        // Backward time from sample i-1 until θ falls to the query; θ decreases with s.
        let s = bisect(|s| -rk4_linear_back(th, w, self.linear_gain, s).0, -theta, h);
        rk4_linear_back(th, w, self.linear_gain, s).1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub inputs: ProfileInputs,
    pub kind: ProfileKind,
    pub shape: ProfileShape,
    pub max_deviation: f64,
    pub theta_at_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub trials: Vec<TrialResult>,
    pub max_deviation: f64,
    pub trapezoid: usize,
    pub collapsed: usize,
    pub modified: usize,
}

/// Largest `|closed form − ODE|` over `points` evenly spaced angles in
/// `[0, 1.2 θ3]` plus both sides of every segment boundary.
pub fn compare(inputs: ProfileInputs, kind: ProfileKind, points: usize) -> Result<TrialResult, ProfileError> {
    let closed = RateProfile::build(inputs, kind)?;
    let ode = OdeProfile::new(inputs, kind)?;
    let span = 1.2 * closed.theta3;
    let mut thetas: Vec<f64> = (0..=points).map(|i| span * i as f64 / points as f64).collect();
    let (b, n) = closed.boundaries();
    for &x in &b[..n] {
        thetas.extend([x * (1.0 - 1e-9), x, x * (1.0 + 1e-9)]);
    }
    let mut worst = (0.0, 0.0);
    for th in thetas {
        let d = (closed.eval(th) - ode.omega(th)).abs();
        if !(d <= worst.0) {
            worst = (d, th);
        }
    }
    Ok(TrialResult {
        inputs,
        kind,
        shape: closed.shape,
        max_deviation: worst.0,
        theta_at_max: worst.1,
    })
}

/// Random profile inputs. Every second trial is modified; trials `4k+2` and
/// `4k+3` are forced to collapse and the rest keep a plateau.
pub fn random_trial(rng: &mut ChaCha8Rng, index: usize) -> (ProfileInputs, ProfileKind) {
    let alpha = 10f64.powf(rng.random_range(-4.0..-1.7));
    let tau1 = rng.random_range(0.2..8.0);
    let tau3 = rng.random_range(0.2..8.0);
    let ramps = 0.5 * alpha * (tau1 + tau3);
    let omega_max = if index % 4 >= 2 {
        ramps * rng.random_range(0.2..0.95)
    } else {
        ramps * rng.random_range(1.05..6.0)
    };
    let kind = if index % 2 == 1 { ProfileKind::Modified } else { ProfileKind::Trapezoid };
    (
        ProfileInputs {
            alpha,
            tau1,
            tau3,
            omega_max,
        },
        kind,
    )
}

pub fn run_trials(trials: usize, seed: u64, points: usize) -> Result<OracleReport, ProfileError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = OracleReport {
        trials: Vec::with_capacity(trials),
        max_deviation: 0.0,
        trapezoid: 0,
        collapsed: 0,
        modified: 0,
    };
    for i in 0..trials {
        let (inputs, kind) = random_trial(&mut rng, i);
        let r = compare(inputs, kind, points)?;
        match r.shape {
            ProfileShape::Trapezoid => report.trapezoid += 1,
            ProfileShape::Collapsed => report.collapsed += 1,
            ProfileShape::Modified { .. } => report.modified += 1,
        }
        if !(r.max_deviation <= report.max_deviation) {
            report.max_deviation = r.max_deviation;
        }
        report.trials.push(r);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: ProfileInputs = ProfileInputs {
        alpha: 0.002,
        tau1: 5.0,
        tau3: 7.0,
        omega_max: 0.01745,
    };

    #[test]
    fn schedule_reaches_cap() {
        let p = OdeProfile::new(SAMPLE, ProfileKind::Trapezoid).unwrap();
        // Ramps of 5 s and 7 s at 0.002 rad/s² plus the plateau end at the cap.
        let k = p.knots.last().unwrap();
        let (_, w) = rk4_poly(k.theta, k.omega, k.accel, k.jerk, k.duration);
        assert!((w - SAMPLE.omega_max).abs() < 1e-15);
        assert!(!p.collapsed);
    }

    #[test]
    fn linear_segment_is_exponential() {
        let p = OdeProfile::new(SAMPLE, ProfileKind::Modified).unwrap();
        let th1 = p.knots[0].theta;
        for f in [0.9, 0.5, 0.1, 1e-3] {
            assert!((p.omega(f * th1) - p.linear_gain * f * th1).abs() < 1e-13);
        }
    }

    #[test]
    fn sample_profiles_match() {
        for kind in [ProfileKind::Trapezoid, ProfileKind::Modified] {
            let r = compare(SAMPLE, kind, 2000).unwrap();
            assert!(r.max_deviation < 1e-10, "{kind:?}: {r:?}");
        }
        let collapsed = ProfileInputs {
            omega_max: 0.005,
            ..SAMPLE
        };
        let r = compare(collapsed, ProfileKind::Trapezoid, 2000).unwrap();
        assert_eq!(r.shape, ProfileShape::Collapsed);
        assert!(r.max_deviation < 1e-10, "{r:?}");
    }

    #[test]
    fn trials_cover_all_shapes_deterministically() {
        let a = run_trials(16, 3, 200).unwrap();
        assert!(a.trapezoid > 0 && a.collapsed > 0 && a.modified > 0, "{a:?}");
        assert_eq!(a, run_trials(16, 3, 200).unwrap());
    }
}
