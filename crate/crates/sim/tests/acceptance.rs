//! Acceptance suite A1–A8.
//!
//! Each criterion prints one `PASS`/`FAIL` line on stderr (uncaptured, so the
//! lines show up in plain `cargo test` output). Criteria that fail are
//! reported, not asserted; set `SLEWCTL_ACCEPTANCE_STRICT=1` to turn any
//! `FAIL` into a test failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use slewctl::config::{DesiredSpec, RunConfig};
use slewctl::oracle;
use slewctl::run::{build, run};
use slewctl::sweep::{slew_sweep, SweepRow, SweepSpec};
use slewctl_core::controller::{compute_command, CycleMemory};
use slewctl_core::desired::DesiredFrame;
use slewctl_core::math::Vec3;
use slewctl_core::rateprofile::{
    partials, CubicRoot, ProfileInputs, ProfileKind, ProfileShape, RateProfile, Segment,
};
use slewctl_core::scenario::{CycleRecord, Observer, RunSummary};

const DEG: f64 = std::f64::consts::PI / 180.0;
const RATE_LIMIT: f64 = 3.0 * DEG * 1.01;
const TORQUE_LIMIT: f64 = 150.0;
const CUBIC_TOL: f64 = 1e-10;

#[derive(Default)]
struct Records(Vec<CycleRecord>);

impl Observer for Records {
    fn on_cycle(&mut self, r: &CycleRecord) {
        self.0.push(*r);
    }
}

fn simulate(cfg: &RunConfig) -> (RunSummary, Vec<CycleRecord>, Duration) {
    let mut rec = Records::default();
    let start = Instant::now();
    let summary = run(cfg, &mut rec).expect("scenario runs");
    (summary, rec.0, start.elapsed())
}

fn roll(axis: Vec3, angle_deg: f64, kind: ProfileKind, freq: f64, disturbance: bool) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.control.kind = kind;
    cfg.scenario.control_frequency = freq;
    cfg.scenario.disturbance = disturbance;
    cfg.scenario.desired = DesiredSpec::RestToRest {
        axis,
        angle: angle_deg * DEG,
    };
    cfg
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "never".into(), |v| format!("{v:.2} s"))
}

/// Worst cubic diagnostics over segment-3 evaluations.
#[derive(Debug, Default, Clone, Copy)]
struct CubicAudit {
    evaluations: usize,
    worst_residual: f64,
    bad: usize,
}

impl CubicAudit {
    fn check(&mut self, c: &CubicRoot, tau3: f64) {
        self.evaluations += 1;
        let ok = c.scaled_residual <= CUBIC_TOL && (0.0..=tau3).contains(&c.tau);
        if !ok {
            self.bad += 1;
        }
        if !(c.scaled_residual <= self.worst_residual) {
            self.worst_residual = c.scaled_residual;
        }
    }

    fn records(&mut self, records: &[CycleRecord], cfg: &RunConfig) {
        for r in records {
            let o = &r.output;
            if let (Segment::RampDown, Some(c)) = (o.segment, o.cubic) {
                let inputs = ProfileInputs {
                    alpha: o.accel.alpha_r,
                    tau1: cfg.control.tau1,
                    tau3: cfg.control.tau3,
                    omega_max: o.omega_r_max,
                };
                let tau3 = RateProfile::build(inputs, cfg.control.kind).expect("profile rebuilds").tau3;
                self.check(&c, tau3);
            }
        }
    }

    fn summary(&mut self, s: &RunSummary) {
        self.evaluations += s.cubic.evaluations;
        self.bad += s.cubic.clamped + s.cubic.out_of_range;
        if s.cubic.max_scaled_residual > CUBIC_TOL {
            self.bad += 1;
        }
        self.worst_residual = self.worst_residual.max(s.cubic.max_scaled_residual);
    }
}

struct Report {
    lines: Vec<(String, bool)>,
}

impl Report {
    fn line(&mut self, id: &str, pass: bool, detail: String) {
        let text = format!("{id} {} {detail}", if pass { "PASS" } else { "FAIL" });
        let mut err = std::io::stderr().lock();
        let _ = writeln!(err, "{text}");
        self.lines.push((text, pass));
    }
}

fn a1(report: &mut Report, audit: &mut CubicAudit) {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, axis) in [("x", Vec3::X), ("y", Vec3::Y), ("z", Vec3::Z)] {
        let cfg = roll(axis, 90.0, ProfileKind::Modified, 10.0, true);
        let (s, records, elapsed) = simulate(&cfg);
        audit.records(&records, &cfg);
        let ok = s.max_rate <= RATE_LIMIT
            && s.max_torque <= TORQUE_LIMIT
            && s.slew_time.is_some()
            && elapsed < Duration::from_secs(5);
        pass &= ok;
        parts.push(format!(
            "{name}: rate {:.4} deg/s, torque {:.3} N·m, slew {}, first entry {}, {:.0} ms",
            s.max_rate / DEG,
            s.max_torque,
            opt(s.slew_time),
            opt(s.first_entry),
            elapsed.as_secs_f64() * 1e3
        ));
    }
    report.line("A1", pass, format!("(limits 3.03 deg/s, 150 N·m, hold-to-end convergence) {}", parts.join("; ")));
}

/// Largest gap, count of unconverged cells and monotonicity breaks.
fn sweep_stats(rows: &[SweepRow]) -> (Option<f64>, usize, usize) {
    let mut gap: Option<f64> = None;
    let mut unconverged = 0;
    for pair in rows.chunks(2) {
        match (pair[0].slew_time(), pair[1].slew_time()) {
            (Some(a), Some(b)) => gap = Some(gap.unwrap_or(0.0).max((b - a).abs())),
            _ => unconverged += 1,
        }
    }
    let mut breaks = 0;
    for kind in [ProfileKind::Trapezoid, ProfileKind::Modified] {
        for axis in ["x", "y", "z"] {
            let series: Vec<Option<f64>> = rows
                .iter()
                .filter(|r| r.kind == kind && r.axis == axis)
                .map(SweepRow::slew_time)
                .collect();
            breaks += series
                .windows(2)
                .filter(|w| match (w[0], w[1]) {
                    (Some(a), Some(b)) => b < a,
                    _ => true,
                })
                .count();
        }
    }
    (gap, unconverged, breaks)
}

fn a2(report: &mut Report, audit: &mut CubicAudit) {
    let rows = slew_sweep(&RunConfig::default(), &SweepSpec::default());
    for r in &rows {
        audit.summary(r.outcome.as_ref().expect("sweep cell runs"));
    }
    let (gap, unconverged, breaks) = sweep_stats(&rows);
    let pass = unconverged == 0 && gap.is_some_and(|g| g <= 0.8) && breaks == 0;

    // Same 90° cells at 100 Hz, for reference only.
    let mut fast = Vec::new();
    for (name, axis) in [("x", Vec3::X), ("y", Vec3::Y), ("z", Vec3::Z)] {
        let t = |k| simulate(&roll(axis, 90.0, k, 100.0, true)).0.slew_time;
        let (a, b) = (t(ProfileKind::Trapezoid), t(ProfileKind::Modified));
        fast.push(format!("{name} {}", a.zip(b).map_or("n/a".into(), |(a, b)| format!("{:+.2} s", b - a))));
    }
    report.line(
        "A2",
        pass,
        format!(
            "10 Hz grid of {} cells: {unconverged} (axis, angle) pairs without a hold-to-end slew time, \
             max |gap| over converged pairs {} (limit 0.8 s), {breaks} monotonicity breaks; \
             90 deg gap at 100 Hz: {}",
            rows.len(),
            gap.map_or("n/a".into(), |g| format!("{g:.2} s")),
            fast.join(", ")
        ),
    );
}

fn a3(report: &mut Report, audit: &mut CubicAudit) {
    let start = Instant::now();
    let r = oracle::run_trials(100, 7, 1000).expect("oracle trials");
    let elapsed = start.elapsed();
    for t in &r.trials {
        let p = RateProfile::build(t.inputs, t.kind).unwrap();
        let span = 1.2 * p.theta3;
        for i in 0..=1000 {
            if let Some(c) = p.eval_detailed(span * i as f64 / 1000.0).cubic {
                audit.check(&c, p.tau3);
            }
        }
    }
    let collapsed_modified = r
        .trials
        .iter()
        .filter(|t| t.shape == ProfileShape::Modified { collapsed: true })
        .count();
    let pass = r.max_deviation <= 1e-8
        && r.trapezoid > 0
        && r.collapsed > 0
        && r.modified > 0
        && elapsed < Duration::from_secs(30);
    report.line(
        "A3",
        pass,
        format!(
            "100 trials: max |closed − ODE| {:.3e} rad/s (limit 1e-8), shapes trapezoid {} / collapsed {} / modified {} \
             ({collapsed_modified} collapsed), {:.2} s",
            r.max_deviation,
            r.trapezoid,
            r.collapsed,
            r.modified,
            elapsed.as_secs_f64()
        ),
    );
}

fn a4(report: &mut Report, audit: &CubicAudit) {
    report.line(
        "A4",
        audit.bad == 0 && audit.evaluations > 0,
        format!(
            "{} ramp-down evaluations across A1–A3: worst scaled residual {:.3e} (limit 1e-10), {} out of tolerance or range",
            audit.evaluations, audit.worst_residual, audit.bad
        ),
    );
}

fn norm(v: Vec3) -> f64 {
    v.norm()
}

struct Reaching {
    increases: usize,
    checked: usize,
    reach: Option<f64>,
    v0: f64,
}

fn reaching(records: &[CycleRecord]) -> Reaching {
    let mut increases = 0;
    let mut checked = 0;
    for w in records.windows(2) {
        if norm(w[0].output.s) > 1e-4 {
            checked += 1;
            if !(w[1].output.lyapunov < w[0].output.lyapunov) {
                increases += 1;
            }
        }
    }
    let t0 = records[0].state.t;
    Reaching {
        increases,
        checked,
        reach: records.iter().find(|r| norm(r.output.s) < 1e-4).map(|r| r.state.t - t0),
        v0: records[0].output.lyapunov,
    }
}

fn a5(report: &mut Report) {
    let cfg = roll(Vec3::X, 90.0, ProfileKind::Modified, 10.0, false);
    let (sc, _) = build(&cfg).unwrap();
    let (_, records, _) = simulate(&cfg);
    let r = reaching(&records);
    let (b1, b2) = (cfg.control.beta1, cfg.control.beta2);
    let (lmin, lmax) = (sc.satellite.lambda_min(), sc.satellite.lambda_max());
    let period = 1.0 / cfg.scenario.control_frequency;
    let stated = 2.0 * r.v0.powf((1.0 - b2) / 2.0) / (b1 * lmin * (1.0 - b2)) + period;
    // With V = ½sᵀJs one has ‖s‖² ≥ 2V/λ_max, which gives this bound instead.
    let c = b1 * lmin * (2.0 / lmax).powf((1.0 + b2) / 2.0);
    let derived = 2.0 * r.v0.powf((1.0 - b2) / 2.0) / (c * (1.0 - b2)) + period;
    let pass = r.increases == 0 && r.reach.is_some_and(|t| t <= stated);

    let (_, fast, _) = simulate(&roll(Vec3::X, 90.0, ProfileKind::Modified, 100.0, false));
    let f = reaching(&fast);
    report.line(
        "A5",
        pass,
        format!(
            "disturbance off, 10 Hz: V failed to decrease on {}/{} cycles with ‖s‖ > 1e-4; ‖s‖ < 1e-4 reached after {} \
             vs bound {stated:.3e} s (with ‖s‖² ≥ 2V/λ_max: {derived:.3} s), V0 = {:.3} J; \
             100 Hz: {}/{} non-decreasing cycles, reached after {}",
            r.increases,
            r.checked,
            opt(r.reach),
            r.v0,
            f.increases,
            f.checked,
            opt(f.reach)
        ),
    );
}

fn tail_std(records: &[CycleRecord]) -> f64 {
    let n = records.len();
    let tail: Vec<f64> = records[n - n / 5..].iter().map(|r| r.output.u_cmd.norm()).collect();
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    (tail.iter().map(|u| (u - mean).powi(2)).sum::<f64>() / tail.len() as f64).sqrt()
}

fn a6(report: &mut Report) {
    let std = |kind, freq| tail_std(&simulate(&roll(Vec3::X, 90.0, kind, freq, true)).1);
    let trap10 = std(ProfileKind::Trapezoid, 10.0);
    let trap100 = std(ProfileKind::Trapezoid, 100.0);
    let mod10 = std(ProfileKind::Modified, 10.0);
    report.line(
        "A6",
        trap100 < trap10 && mod10 < trap10,
        format!(
            "std ‖u‖ over the last 20 % of the 90 deg roll: trapezoid 10 Hz {trap10:.3} N·m, trapezoid 100 Hz {trap100:.3} N·m, \
             modified 10 Hz {mod10:.3} N·m"
        ),
    );
}

fn a7(report: &mut Report) {
    let cfg = RunConfig::parse_str("[scenario]\ntype = target_staring\n", "a7").unwrap();
    let (s, records, _) = simulate(&cfg);
    let peak = records.iter().map(|r| r.desired.omega_d.norm()).fold(0.0, f64::max);
    let sweep = records[0].desired.q_d.angle_to(&records[records.len() - 1].desired.q_d);
    let band = 0.05 * DEG;
    // Acquisition: first entry into the rest-to-rest convergence band.
    let t0 = records[0].state.t;
    let acquired = s.first_entry.map(|t| records.iter().position(|r| r.state.t - t0 >= t - 1e-9).unwrap());
    let steady = acquired.map(|k| records[k..].iter().map(|r| r.output.error.theta_e).fold(0.0, f64::max));
    let pass = (0.5 * DEG..=1.0 * DEG).contains(&peak)
        && sweep > 1.0 * DEG
        && steady.is_some_and(|m| m < band)
        && s.max_rate <= RATE_LIMIT
        && s.max_torque <= TORQUE_LIMIT;
    report.line(
        "A7",
        pass,
        format!(
            "target staring, {:.0} s: peak ‖ω_D‖ {:.3} deg/s, desired frame turns {:.1} deg, acquired (θ_e < 0.01 deg, ‖ω_e‖ < 0.01 deg/s) at {}, \
             max θ_e afterwards {}, rate {:.4} deg/s, torque {:.3} N·m",
            cfg.scenario.duration,
            peak / DEG,
            sweep / DEG,
            opt(acquired.map(|k| records[k].state.t - t0)),
            steady.map_or("n/a".into(), |m| format!("{:.4} deg", m / DEG)),
            s.max_rate / DEG,
            s.max_torque
        ),
    );
}

/// Same segment under ±10 % moves of θ, α_R and ω_Rmax.
fn clear_of_boundaries(inputs: ProfileInputs, kind: ProfileKind, theta: f64) -> bool {
    let seg = |i: ProfileInputs, th: f64| RateProfile::build(i, kind).unwrap().eval_detailed(th).segment;
    let base = seg(inputs, theta);
    [-0.1, 0.1].iter().all(|&m| {
        seg(inputs, theta * (1.0 + m)) == base
            && seg(ProfileInputs { alpha: inputs.alpha * (1.0 + m), ..inputs }, theta) == base
            && seg(ProfileInputs { omega_max: inputs.omega_max * (1.0 + m), ..inputs }, theta) == base
    })
}

/// Central difference of `f` at `x` with relative step 1e-5.
fn central(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-5 * x.abs();
    (f(x + h) - f(x - h)) / (2.0 * h)
}

#[derive(Default)]
struct PartialAudit {
    points: usize,
    compared: usize,
    worst_central: f64,
    worst_halving: f64,
    halving_compared: usize,
}

impl PartialAudit {
    fn point(&mut self, inputs: ProfileInputs, kind: ProfileKind, theta: f64) {
        if !(theta > 0.0) || !clear_of_boundaries(inputs, kind, theta) {
            return;
        }
        let a = partials(inputs, kind, theta, 1e-7).unwrap();
        let h = partials(inputs, kind, theta, 5e-8).unwrap();
        let w = a.omega_r;
        if !(w > 0.0) {
            return;
        }
        self.points += 1;
        let eval = |i: ProfileInputs, th: f64| RateProfile::build(i, kind).unwrap().eval(th);
        let exact = [
            (a.d_theta, h.d_theta, central(|x| eval(inputs, x), theta), theta),
            (
                a.d_alpha,
                h.d_alpha,
                central(|x| eval(ProfileInputs { alpha: x, ..inputs }, theta), inputs.alpha),
                inputs.alpha,
            ),
            (
                a.d_omega_max,
                h.d_omega_max,
                central(|x| eval(ProfileInputs { omega_max: x, ..inputs }, theta), inputs.omega_max),
                inputs.omega_max,
            ),
        ];
        for (fwd, half, c, var) in exact {
            // Partials with elasticity below 1e-3 are compared on the ω_R/var scale.
            let scale = c.abs().max(1e-3 * w / var);
            self.compared += 1;
            self.worst_central = self.worst_central.max((fwd - c).abs() / scale);
            let s = fwd.abs().max(half.abs());
            if s * var / w > 0.25 {
                self.halving_compared += 1;
                self.worst_halving = self.worst_halving.max((fwd - half).abs() / s);
            }
        }
    }
}

struct FeedforwardAudit {
    compared: usize,
    skipped: usize,
    /// Against the derivative at the cycle time.
    worst: f64,
    median: f64,
    /// Against the derivative at the midpoint of the difference interval.
    worst_midpoint: f64,
}

/// The controller's backward difference of the feed-forward norm against
/// central differences of the same norm, with the body riding the desired
/// frame. Errors are relative to `max(|oracle|, 1 % of the peak rate)`.
/// Intervals where `J ω̇_D` reverses direction contain a kink of the norm
/// and are skipped.
fn feedforward_rate_audit(cfg: &RunConfig) -> FeedforwardAudit {
    let (sc, desired) = build(cfg).unwrap();
    let period = 1.0 / cfg.scenario.control_frequency;
    let j = *sc.satellite.inertia();
    let accel = |t: f64| j * desired.sample(t).unwrap().omega_d_dot;
    let ff = |t: f64| {
        let d = desired.sample(t).unwrap();
        (j * d.omega_d_dot).norm() + d.omega_d.cross(j * d.omega_d).norm()
    };
    let h = 1e-3;
    let derivative = |t: f64| (ff(t + h) - ff(t - h)) / (2.0 * h);
    let t0 = sc.initial.t;
    let mut memory = CycleMemory::default();
    let mut skipped = 0;
    // (backward difference, derivative at t, derivative at t − T/2)
    let mut samples = Vec::new();
    for k in 0..sc.cycles() - 1 {
        let t = t0 + k as f64 * period;
        let d = desired.sample(t).unwrap();
        let (out, next) = compute_command(&d.q_d, d.omega_d, &d, &sc.control, &sc.satellite, period, &memory).unwrap();
        memory = next;
        if k == 0 {
            continue;
        }
        if accel(t - period - h).dot(accel(t + h)) <= 0.0 {
            skipped += 1;
            continue;
        }
        samples.push((out.feedforward_rate, derivative(t), derivative(t - 0.5 * period)));
    }
    let floor = 0.01 * samples.iter().map(|s| s.1.abs()).fold(0.0, f64::max);
    let rel = |fd: f64, oracle: f64| (fd - oracle).abs() / oracle.abs().max(floor);
    let mut at_cycle: Vec<f64> = samples.iter().map(|s| rel(s.0, s.1)).collect();
    at_cycle.sort_by(f64::total_cmp);
    FeedforwardAudit {
        compared: samples.len(),
        skipped,
        worst: at_cycle.last().copied().unwrap_or(f64::NAN),
        median: at_cycle.get(at_cycle.len() / 2).copied().unwrap_or(f64::NAN),
        worst_midpoint: samples.iter().map(|s| rel(s.0, s.2)).fold(0.0, f64::max),
    }
}

fn a8(report: &mut Report) {
    let mut audit = PartialAudit::default();
    // Operating points visited by the 90° maneuvers.
    for kind in [ProfileKind::Trapezoid, ProfileKind::Modified] {
        let cfg = roll(Vec3::X, 90.0, kind, 10.0, true);
        let (_, records, _) = simulate(&cfg);
        for r in records.iter().step_by(7) {
            let o = &r.output;
            let inputs = ProfileInputs {
                alpha: o.accel.alpha_r,
                tau1: cfg.control.tau1,
                tau3: cfg.control.tau3,
                omega_max: o.omega_r_max,
            };
            audit.point(inputs, kind, o.error.theta_e);
        }
    }
    // Random points across the controller's operating envelope.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..400 {
        let inputs = ProfileInputs {
            alpha: rng.random_range(1e-3..2e-2),
            tau1: rng.random_range(0.2..8.0),
            tau3: rng.random_range(0.2..8.0),
            omega_max: rng.random_range(1e-2..6e-2),
        };
        let kind = if i % 2 == 0 { ProfileKind::Trapezoid } else { ProfileKind::Modified };
        let theta3 = RateProfile::build(inputs, kind).unwrap().theta3;
        audit.point(inputs, kind, rng.random_range(0.02..0.98) * theta3);
    }
    let staring = RunConfig::parse_str("[scenario]\ntype = target_staring\n", "a8").unwrap();
    let ff = feedforward_rate_audit(&staring);

    let pass = audit.compared > 0
        && audit.worst_central <= 1e-4
        && audit.worst_halving < 1e-6
        && ff.compared > 0
        && ff.worst <= 1e-4;
    report.line(
        "A8",
        pass,
        format!(
            "{} points clear of segment boundaries: worst forward vs central partial {:.3e} (limit 1e-4), \
             worst eps-halving change {:.3e} over {} partials (limit 1e-6); \
             feed-forward norm backward difference vs central-difference derivative at the cycle time over {} staring cycles \
             ({} kink intervals skipped): worst {:.3e} (limit 1e-4), median {:.3e}; {:.3e} against the interval midpoint",
            audit.points,
            audit.worst_central,
            audit.worst_halving,
            audit.halving_compared,
            ff.compared,
            ff.skipped,
            ff.worst,
            ff.median,
            ff.worst_midpoint
        ),
    );
}

#[test]
fn acceptance_suite() {
    // Start on a fresh line after libtest's `test acceptance_suite ...`.
    let _ = writeln!(std::io::stderr());
    let mut report = Report { lines: Vec::new() };
    let mut cubic = CubicAudit::default();
    a1(&mut report, &mut cubic);
    a2(&mut report, &mut cubic);
    a3(&mut report, &mut cubic);
    a4(&mut report, &cubic);
    a5(&mut report);
    a6(&mut report);
    a7(&mut report);
    a8(&mut report);

    assert_eq!(report.lines.len(), 8);
    if std::env::var_os("SLEWCTL_ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
        let failed: Vec<_> = report.lines.iter().filter(|(_, p)| !p).map(|(l, _)| l.as_str()).collect();
        assert!(failed.is_empty(), "failing criteria:\n{}", failed.join("\n"));
    }
}
