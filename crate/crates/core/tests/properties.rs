use proptest::prelude::*;
use slewctl_core::controller::saturate;
use slewctl_core::errgeo::{error_state, DEFAULT_AXIS_GUARD};
use slewctl_core::math::{kinematics_rate, Mat3, Quat4, Quaternion, Vec3};
use slewctl_core::plant::{rk4_step, rk4_step_raw, BodyState, Disturbance, SatelliteParams};
use slewctl_core::rateprofile::{
    alpha_max, alpha_min, partials, solve_cubic_tau, ProfileInputs, ProfileKind, ProfileShape, RateProfile,
};

fn quat() -> impl Strategy<Value = Quaternion> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("non-degenerate", |(a, b, c, d)| a * a + b * b + c * c + d * d > 1e-3)
        .prop_map(|(x, y, z, w)| Quaternion::new(Vec3::new(x, y, z), w).unwrap())
}

fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn profile_inputs() -> impl Strategy<Value = ProfileInputs> {
    (1e-4..2e-2f64, 0.2..8.0f64, 0.2..8.0f64, 2e-3..6e-2f64).prop_map(|(alpha, tau1, tau3, omega_max)| {
        ProfileInputs {
            alpha,
            tau1,
            tau3,
            omega_max,
        }
    })
}

/// Profile inputs the controller actually produces for the reference satellite.
fn operating_inputs() -> impl Strategy<Value = ProfileInputs> {
    (1e-3..2e-2f64, 0.2..8.0f64, 0.2..8.0f64, 1e-2..6e-2f64).prop_map(|(alpha, tau1, tau3, omega_max)| {
        ProfileInputs {
            alpha,
            tau1,
            tau3,
            omega_max,
        }
    })
}

proptest! {
    #[test]
    fn product_is_unit(p in quat(), q in quat()) {
        prop_assert!(((p * q).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_cancels(q in quat()) {
        let e = q.inverse() * q;
        prop_assert!((e.scalar() - 1.0).abs() < 1e-12);
        prop_assert!(e.vector().norm() < 1e-12);
        prop_assert_eq!(q.inverse().inverse(), q);
    }

    #[test]
    fn rotation_composition_matches_product(p in quat(), q in quat()) {
        let lhs = (p * q).to_rotation();
        let rhs = p.to_rotation().compose(&q.to_rotation());
        prop_assert!(lhs.matrix().max_abs_diff(rhs.matrix()) < 1e-9);
    }

    #[test]
    fn rotation_is_orthonormal(q in quat()) {
        let m = *q.to_rotation().matrix();
        prop_assert!(m.transpose().mul_mat(&m).max_abs_diff(&Mat3::IDENTITY) < 1e-9);
        prop_assert!((m.determinant() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn saturation_bound_is_exact(u in vec3(1e4), u_max in 1.0..500.0f64) {
        let (c, hit) = saturate(u, u_max);
        prop_assert!(c.norm() <= u_max);
        prop_assert_eq!(hit, u.norm() > u_max);
        if hit {
            prop_assert!(c.cross(u).norm() <= 1e-12 * u.norm() * c.norm());
            prop_assert!(c.dot(u) > 0.0);
        }
    }

    #[test]
    fn kinematic_rate_is_tangent(q in quat(), w in vec3(1.0)) {
        prop_assert!(q.as_quat4().dot(q.kinematics_rate(w)).abs() < 1e-12);
    }

    #[test]
    fn axis_rate_is_tangent(qd in quat(), qb in quat(), wd in vec3(0.05), wb in vec3(0.05)) {
        let s = error_state(&qd, &qb, wd, wb, DEFAULT_AXIS_GUARD);
        prop_assume!(!s.singular);
        prop_assert!((s.axis.norm() - 1.0).abs() < 1e-9);
        prop_assert!(s.axis.dot(s.axis_rate).abs() < 1e-9);
        prop_assert!(s.theta_e >= 0.0 && s.theta_e <= core::f64::consts::PI);
        prop_assert_eq!(s.theta_e, 2.0 * libm::acos(s.q_e.scalar().clamp(-1.0, 1.0)));
    }

    #[test]
    fn profile_monotone_and_continuous(inputs in profile_inputs(), modified in any::<bool>()) {
        let kind = if modified { ProfileKind::Modified } else { ProfileKind::Trapezoid };
        let p = RateProfile::build(inputs, kind).unwrap();
        let mut prev = 0.0;
        for i in 0..=600 {
            let th = 1.2 * p.theta3 * i as f64 / 600.0;
            let w = p.eval(th);
            prop_assert!(w + 1e-15 >= prev, "decrease at {}: {} < {}", th, w, prev);
            prev = w;
        }
        let (b, n) = p.boundaries();
        for &theta in &b[..n] {
            let lo = p.eval(theta * (1.0 - 1e-12));
            prop_assert!((lo - p.eval(theta)).abs() < 1e-10);
        }
        prop_assert!(p.theta1 > 0.0 && p.theta1 <= p.theta2 && p.theta2 < p.theta3);
        prop_assert!(p.omega1 > 0.0 && p.omega1 < inputs.omega_max);
        prop_assert!(p.segment_time().is_finite());
    }

    #[test]
    fn profile_inside_bang_bang_envelope(inputs in profile_inputs()) {
        let t = RateProfile::build(inputs, ProfileKind::Trapezoid).unwrap();
        let m = RateProfile::build(inputs, ProfileKind::Modified).unwrap();
        for i in 0..=400 {
            let th = 1.2 * m.theta3 * i as f64 / 400.0;
            let env = (2.0 * inputs.alpha * th).sqrt().min(inputs.omega_max);
            prop_assert!(t.eval(th) <= env + 1e-12);
            prop_assert!(m.eval(th) <= t.eval(th) + 1e-12);
        }
    }

    #[test]
    fn ramp_down_residual_small(inputs in profile_inputs(), f in 0.0..1.0f64) {
        let p = RateProfile::build(inputs, ProfileKind::Trapezoid).unwrap();
        let th = p.theta2 + f * (p.theta3 - p.theta2);
        if let Some(c) = p.eval_detailed(th).cubic {
            prop_assert!(c.scaled_residual <= 1e-10);
            prop_assert!(c.tau >= 0.0 && c.tau <= p.tau3);
        }
        let r = solve_cubic_tau(-3.0, f, 2.0);
        prop_assert!(r.scaled_residual <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { max_global_rejects: 1_000_000, ..ProptestConfig::default() })]

    #[test]
    fn partials_stable_under_step_halving(inputs in operating_inputs(), f in 0.02..0.98f64, modified in any::<bool>()) {
        let kind = if modified { ProfileKind::Modified } else { ProfileKind::Trapezoid };
        let p = RateProfile::build(inputs, kind).unwrap();
        let th = f * p.theta3;
        prop_assume!(clear_of_boundaries(inputs, kind, th, 0.1));
        let a = partials(inputs, kind, th, 1e-7).unwrap();
        let h = partials(inputs, kind, th, 5e-8).unwrap();
        let w = a.omega_r;
        prop_assume!(w > 0.0);
        let pairs = [
            (a.d_theta, h.d_theta, th),
            (a.d_alpha, h.d_alpha, inputs.alpha),
            (a.d_omega_max, h.d_omega_max, inputs.omega_max),
        ];
        for (x, y, var) in pairs {
            let scale = x.abs().max(y.abs());
            // Profile evaluation carries ~1e-14 relative roundoff, so a forward
            // difference at ε = 1e-7 resolves only elasticities above ~0.25.
            if scale * var / w > 0.25 {
                prop_assert!((x - y).abs() / scale < 1e-6, "{} vs {}", x, y);
            }
        }
    }
}

/// True when moving `θ`, `α_R` or `ω_Rmax` by up to `margin` (relative) keeps
/// the evaluation in the same segment.
fn clear_of_boundaries(inputs: ProfileInputs, kind: ProfileKind, theta: f64, margin: f64) -> bool {
    let seg = |i: ProfileInputs, th: f64| RateProfile::build(i, kind).unwrap().eval_detailed(th).segment;
    let base = seg(inputs, theta);
    [-margin, margin].iter().all(|&m| {
        seg(inputs, theta * (1.0 + m)) == base
            && seg(ProfileInputs { alpha: inputs.alpha * (1.0 + m), ..inputs }, theta) == base
            && seg(ProfileInputs { omega_max: inputs.omega_max * (1.0 + m), ..inputs }, theta) == base
    })
}

#[test]
fn collapsed_profiles_reach_cap() {
    let p = RateProfile::build(
        ProfileInputs {
            alpha: 0.02,
            tau1: 2.0,
            tau3: 3.0,
            omega_max: 0.01,
        },
        ProfileKind::Trapezoid,
    )
    .unwrap();
    assert_eq!(p.shape, ProfileShape::Collapsed);
    assert_eq!(p.eval(p.theta3), 0.01);
    assert!((p.eval(p.theta3 * (1.0 - 1e-14)) - 0.01).abs() < 1e-12);
}

#[test]
fn alpha_min_matches_sphere_sampling() {
    let j = SatelliteParams::REFERENCE_INERTIA;
    let lmax = j.symmetric_eigenvalues()[2];
    let a_min = alpha_min(lmax, 150.0, 0.0, 0.99).unwrap();
    // Deterministic golden-spiral sampling of the unit sphere.
    let n = 200_000;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut smallest = f64::INFINITY;
    for i in 0..n {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
        let r = (1.0 - z * z).sqrt();
        let phi = golden * i as f64;
        let e = Vec3::new(r * phi.cos(), r * phi.sin(), z);
        let a = alpha_max(e, &j, 150.0, Vec3::ZERO, Vec3::ZERO, 0.99).unwrap();
        assert!(a >= a_min * (1.0 - 1e-12));
        smallest = smallest.min(a);
    }
    assert!((smallest - a_min) / a_min < 1e-3);
}

fn rhs_free(sat: &SatelliteParams, s: &BodyState) -> Vec3 {
    let j = sat.inertia();
    sat.inertia_inv() * -(s.omega.cross(j * s.omega))
}

#[test]
fn torque_free_momentum_conserved() {
    let sat = SatelliteParams::reference();
    let mut s = BodyState {
        q: Quaternion::from_axis_angle(Vec3::new(0.3, 1.0, -0.2), 0.7).unwrap(),
        omega: Vec3::new(0.02, -0.03, 0.04),
        t: 0.0,
    };
    let h = |s: &BodyState| s.q.to_rotation().apply_inverse(sat.inertia() * s.omega);
    let h0 = h(&s);
    let e0 = 0.5 * s.omega.dot(sat.inertia() * s.omega);
    for _ in 0..10_000 {
        s = rk4_step(&s, Vec3::ZERO, 0.01, &sat, &Disturbance::Off);
    }
    assert!((h(&s) - h0).norm() / h0.norm() < 1e-8);
    let e1 = 0.5 * s.omega.dot(sat.inertia() * s.omega);
    assert!(((e1 - e0) / e0).abs() < 1e-8);
    assert!(rhs_free(&sat, &s).is_finite());
}

#[test]
fn rk4_fourth_order_convergence() {
    let sat = SatelliteParams::reference();
    let torque = |t: f64| Vec3::new(150.0 * (0.7 * t).sin(), -120.0 * (1.3 * t).cos(), 90.0 * (2.1 * t).sin());
    let run = |dt: f64| {
        let mut s = BodyState {
            q: Quaternion::IDENTITY,
            omega: Vec3::new(0.4, -0.3, 0.5),
            t: 0.0,
        };
        let n = (10.0 / dt).round() as usize;
        let per_hold = (0.1 / dt).round() as usize;
        // Torque held per 0.1 s so every resolution sees the same input.
        for k in 0..n {
            let u = torque((k / per_hold) as f64 * 0.1);
            s = rk4_step(&s, u, dt, &sat, &Disturbance::REFERENCE);
            s.t = (k + 1) as f64 * dt;
        }
        s
    };
    let reference = run(0.1 / 64.0);
    let coarse = run(0.1);
    let fine = run(0.05);
    let err = |s: &BodyState| (s.omega - reference.omega).norm() + s.q.angle_to(&reference.q);
    let ratio = err(&coarse) / err(&fine);
    assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
}

#[test]
fn quaternion_drift_per_step_small() {
    let sat = SatelliteParams::reference();
    let w = 3f64.to_radians();
    let mut q = Quaternion::from_axis_angle(Vec3::new(1.0, 2.0, 3.0), 1.0).unwrap();
    for k in 0..1000 {
        let omega = Vec3::new(w * 0.6, -w * 0.64, w * 0.48);
        let (raw, _) = rk4_step_raw(q.as_quat4(), omega, k as f64 * 0.01, 0.01, Vec3::ZERO, &sat, &Disturbance::Off);
        assert!((raw.norm() - 1.0).abs() < 1e-10);
        q = Quaternion::from_quat4(raw).unwrap();
        assert!((q.norm() - 1.0).abs() < 1e-15);
    }
}

#[test]
fn error_kinematics_consistency() {
    // q̇_e = ½ ω_e^D ⊗ q_e with ω_e^D the error rate in D components.
    let w_b = |t: f64| Vec3::new(0.02 * (0.3 * t).sin(), 0.015, -0.01 * (0.2 * t).cos());
    let w_d = |t: f64| Vec3::new(-0.01, 0.02 * (0.5 * t).cos(), 0.005 * t.sin());
    let integrate = |q: Quat4, w: &dyn Fn(f64) -> Vec3, t: f64, dt: f64| {
        let k1 = kinematics_rate(q, w(t));
        let k2 = kinematics_rate(q + k1.scaled(dt / 2.0), w(t + dt / 2.0));
        let k3 = kinematics_rate(q + k2.scaled(dt / 2.0), w(t + dt / 2.0));
        let k4 = kinematics_rate(q + k3.scaled(dt), w(t + dt));
        q + (k1 + k2.scaled(2.0) + k3.scaled(2.0) + k4).scaled(dt / 6.0)
    };
    let mut qb = Quaternion::from_axis_angle(Vec3::Y, 0.4).unwrap().as_quat4();
    let mut qd = Quaternion::from_axis_angle(Vec3::new(1.0, 0.0, 1.0), 1.1).unwrap().as_quat4();
    let qe0 = Quaternion::from_quat4(qd).unwrap() * Quaternion::from_quat4(qb).unwrap().inverse();
    let mut qe = qe0.as_quat4();
    let dt = 0.01;
    for k in 0..1000 {
        let t = k as f64 * dt;
        let e_rate = |tt: f64, qe: Quat4| {
            // ω_e^D = ω_D − T_{D/B} ω_B with T_{D/B} = R(q_e).
            let r = Quaternion::from_quat4(qe).unwrap().to_rotation();
            w_d(tt) - r.apply(w_b(tt))
        };
        let f = |q: Quat4, tt: f64| Quat4::product(Quat4 { v: e_rate(tt, q), w: 0.0 }, q).scaled(0.5);
        let k1 = f(qe, t);
        let k2 = f(qe + k1.scaled(dt / 2.0), t + dt / 2.0);
        let k3 = f(qe + k2.scaled(dt / 2.0), t + dt / 2.0);
        let k4 = f(qe + k3.scaled(dt), t + dt);
        qe = qe + (k1 + k2.scaled(2.0) + k3.scaled(2.0) + k4).scaled(dt / 6.0);
        qb = integrate(qb, &w_b, t, dt);
        qd = integrate(qd, &w_d, t, dt);
    }
    let direct = Quaternion::from_quat4(qd).unwrap() * Quaternion::from_quat4(qb).unwrap().inverse();
    assert!(Quaternion::from_quat4(qe).unwrap().angle_to(&direct) < 1e-6);
}

#[test]
fn error_rates_match_finite_differences() {
    let qb = |t: f64| Quaternion::from_axis_angle(Vec3::new(1.0, 0.2, 0.0), 0.1 + 0.02 * t).unwrap();
    let wb = |_t: f64| Vec3::new(1.0, 0.2, 0.0).normalized().unwrap() * 0.02;
    let qd = |t: f64| Quaternion::from_axis_angle(Vec3::new(0.0, 0.3, 1.0), 0.9 - 0.01 * t).unwrap();
    let wd = |_t: f64| Vec3::new(0.0, 0.3, 1.0).normalized().unwrap() * -0.01;
    let st = |t: f64| error_state(&qd(t), &qb(t), wd(t), wb(t), DEFAULT_AXIS_GUARD);
    for t in [0.0, 5.0, 20.0] {
        let h = 1e-4;
        let (a, b, c) = (st(t - h), st(t), st(t + h));
        let th_fd = (c.theta_e - a.theta_e) / (2.0 * h);
        assert!((th_fd - b.theta_e_rate).abs() < 1e-4, "{th_fd} vs {}", b.theta_e_rate);
        let ax_fd = (c.axis - a.axis) / (2.0 * h);
        assert!((ax_fd - b.axis_rate).norm() < 1e-3, "{ax_fd:?} vs {:?}", b.axis_rate);
    }
}
