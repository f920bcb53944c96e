//! Run configuration in a flat, sectioned `key = value` format.
//!
//! ```text
//! # comments start with '#' or ';'
//! [satellite]
//! jxx = 21400          # inertia entries, kg·m²
//! omega_max_deg = 3    # `_deg` keys take degrees (or deg/s)
//! [control]
//! beta2 = 0.5
//! profile = modified
//! [scenario]
//! type = rest_to_rest
//! axis = x
//! angle_deg = 90
//! [run]
//! out = telemetry.csv
//! ```
//!
//! Every key has a default, so an empty file is the reference setup: the
//! reference spacecraft and gains, a 90° roll at 10 Hz with 0.01 s
//! integration and the disturbance on. Unknown keys, duplicates and values
//! out of range are errors carrying the offending line number.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use slewctl_core::controller::ControlParams;
use slewctl_core::math::{Mat3, Quaternion, Vec3};
use slewctl_core::plant::{PlantError, SatelliteParams};
use slewctl_core::rateprofile::ProfileKind;
use slewctl_core::scenario::{OMEGA_TOL, THETA_TOL};
use slewctl_core::staring::StaringGeometry;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("io: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}:{line}: {msg}")]
    Line { origin: String, line: usize, msg: String },
    #[error("{origin}: {msg}")]
    Invalid { origin: String, msg: String },
}

/// Where the desired frame comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DesiredSpec {
    /// Inertially fixed target attitude reached from the initial attitude.
    RestToRest { axis: Vec3, angle: f64 },
    TargetStaring(StaringGeometry),
    /// Samples imported from a desired-frame CSV file.
    Csv(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialAttitude {
    Identity,
    /// The desired source's reference frame at the start time (identity if it has none).
    Reference,
    /// The desired attitude at the start time, with the desired rate unless overridden.
    Desired,
    Explicit(Quaternion),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub desired: DesiredSpec,
    pub initial: InitialAttitude,
    /// Initial body rate [rad/s]; `None` means at rest (or the desired rate for
    /// [`InitialAttitude::Desired`]).
    pub initial_omega: Option<Vec3>,
    pub start_time: f64,
    pub duration: f64,
    pub control_frequency: f64,
    pub dt: f64,
    pub disturbance: bool,
    pub theta_tol: f64,
    pub omega_tol: f64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            desired: DesiredSpec::RestToRest {
                axis: Vec3::X,
                angle: std::f64::consts::FRAC_PI_2,
            },
            initial: InitialAttitude::Identity,
            initial_omega: None,
            start_time: 0.0,
            duration: 120.0,
            control_frequency: 10.0,
            dt: 0.01,
            disturbance: true,
            theta_tol: THETA_TOL,
            omega_tol: OMEGA_TOL,
        }
    }
}

/// Default run length of a target-staring pass [s].
pub const STARING_DURATION: f64 = 240.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub satellite: SatelliteParams,
    /// `control.d_max` always equals `satellite.d_max()`.
    pub control: ControlParams,
    pub scenario: ScenarioSpec,
    pub out: Option<PathBuf>,
    /// Seed for randomized checks; the simulation itself is deterministic.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            satellite: SatelliteParams::reference(),
            control: ControlParams::default(),
            scenario: ScenarioSpec::default(),
            out: None,
            seed: 0,
        }
    }
}

fn plant_key(e: &PlantError) -> &'static str {
    match e {
        PlantError::NotSymmetric | PlantError::NotPositiveDefinite => "jxx",
        PlantError::NonPositive(name) => name,
    }
}

struct Parser<'a> {
    origin: &'a str,
    /// Line of every key that was set, by `section.canonical_key`.
    lines: HashMap<String, usize>,
    section_lines: HashMap<String, usize>,
}

impl Parser<'_> {
    fn err(&self, line: usize, msg: impl Into<String>) -> ConfigError {
        ConfigError::Line {
            origin: self.origin.to_string(),
            line,
            msg: msg.into(),
        }
    }

    /// Line to blame for a cross-field failure involving `key` in `section`.
    fn blame(&self, section: &str, key: &str, msg: String) -> ConfigError {
        let line = self
            .lines
            .get(&format!("{section}.{key}"))
            .or_else(|| self.section_lines.get(section))
            .copied();
        match line {
            Some(line) => self.err(line, msg),
            None => ConfigError::Invalid {
                origin: self.origin.to_string(),
                msg,
            },
        }
    }
}

fn parse_f64(v: &str) -> Option<f64> {
    v.trim().parse::<f64>().ok().filter(|x| x.is_finite())
}

fn parse_vec(v: &str) -> Option<Vec3> {
    let parts: Vec<_> = v.split(',').map(parse_f64).collect::<Option<_>>()?;
    match parts[..] {
        [x, y, z] => Some(Vec3::new(x, y, z)),
        _ => None,
    }
}

fn parse_axis(v: &str) -> Option<Vec3> {
    match v.trim().to_ascii_lowercase().as_str() {
        "x" | "roll" => Some(Vec3::X),
        "y" | "pitch" => Some(Vec3::Y),
        "z" | "yaw" => Some(Vec3::Z),
        _ => parse_vec(v),
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Some(true),
        "off" | "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

/// How a scalar key is checked.
#[derive(Clone, Copy)]
enum Range {
    Positive,
    NonNegative,
    Any,
    /// Open interval.
    Open(f64, f64),
    /// `(lo, hi]`.
    LeftOpen(f64, f64),
}

impl Range {
    fn check(self, x: f64) -> Result<(), String> {
        match self {
            Range::Positive if !(x > 0.0) => Err("must be > 0".into()),
            Range::NonNegative if !(x >= 0.0) => Err("must be >= 0".into()),
            Range::Open(a, b) if !(x > a && x < b) => Err(format!("must lie in ({a}, {b})")),
            Range::LeftOpen(a, b) if !(x > a && x <= b) => Err(format!("must lie in ({a}, {b}]")),
            _ => Ok(()),
        }
    }
}

/// Scalar keys: `(section, key, admits a _deg variant, range)`.
const SCALARS: &[(&str, &str, bool, Range)] = &[
    ("satellite", "jxx", false, Range::Positive),
    ("satellite", "jyy", false, Range::Positive),
    ("satellite", "jzz", false, Range::Positive),
    ("satellite", "jxy", false, Range::Any),
    ("satellite", "jxz", false, Range::Any),
    ("satellite", "jyz", false, Range::Any),
    ("satellite", "omega_max", true, Range::Positive),
    ("satellite", "u_max", false, Range::Positive),
    ("satellite", "d_max", false, Range::NonNegative),
    ("control", "gamma", false, Range::LeftOpen(0.0, 1.0)),
    ("control", "eta", true, Range::Positive),
    ("control", "beta1", false, Range::Positive),
    ("control", "beta2", false, Range::Open(0.0, 1.0)),
    ("control", "tau1", false, Range::Positive),
    ("control", "tau3", false, Range::Positive),
    ("control", "epsilon", false, Range::Positive),
    ("control", "s_guard", false, Range::NonNegative),
    ("control", "axis_guard", false, Range::NonNegative),
    ("scenario", "angle", true, Range::NonNegative),
    ("scenario", "altitude", false, Range::Positive),
    ("scenario", "look_angle", true, Range::NonNegative),
    ("scenario", "t_closest", false, Range::Any),
    ("scenario", "earth_radius", false, Range::Positive),
    ("scenario", "mu", false, Range::Positive),
    ("scenario", "start_time", false, Range::Any),
    ("scenario", "duration", false, Range::Positive),
    ("scenario", "frequency", false, Range::Positive),
    ("scenario", "dt", false, Range::Positive),
    ("scenario", "theta_tol", true, Range::Positive),
    ("scenario", "omega_tol", true, Range::Positive),
];

/// Non-scalar keys: `(section, key, admits a _deg variant)`.
const OTHERS: &[(&str, &str, bool)] = &[
    ("control", "profile", false),
    ("scenario", "type", false),
    ("scenario", "axis", false),
    ("scenario", "desired_csv", false),
    ("scenario", "initial", false),
    ("scenario", "initial_q", false),
    ("scenario", "initial_omega", true),
    ("scenario", "disturbance", false),
    ("run", "out", false),
    ("run", "seed", false),
];

const SECTIONS: [&str; 4] = ["satellite", "control", "scenario", "run"];

/// Resolve `key` in `section` to its canonical name and whether it was given in degrees.
fn resolve(section: &str, key: &str) -> Option<(&'static str, bool)> {
    let (base, deg) = match key.strip_suffix("_deg") {
        Some(b) => (b, true),
        None => (key, false),
    };
    let scalar = SCALARS
        .iter()
        .find(|(s, k, _, _)| *s == section && *k == base)
        .map(|(_, k, d, _)| (*k, *d));
    let other = OTHERS
        .iter()
        .find(|(s, k, _)| *s == section && *k == base)
        .map(|(_, k, d)| (*k, *d));
    match scalar.or(other) {
        Some((k, allows_deg)) if !deg || allows_deg => Some((k, deg)),
        _ => None,
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::parse_str(&text, &path.display().to_string())?;
        // Relative CSV paths are resolved against the config file's directory.
        if let DesiredSpec::Csv(p) = &mut cfg.scenario.desired {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    /// Parse configuration text; `origin` names the source in error messages.
    pub fn parse_str(text: &str, origin: &str) -> Result<RunConfig, ConfigError> {
        let mut p = Parser {
            origin,
            lines: HashMap::new(),
            section_lines: HashMap::new(),
        };
        let reference = RunConfig::default();
        let jref = reference.satellite.inertia().m;
        let mut scalars: HashMap<&'static str, f64> = HashMap::new();
        let mut others: HashMap<&'static str, (String, bool, usize)> = HashMap::new();

        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split(['#', ';']).next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| p.err(line, format!("malformed section header `{content}`")))?
                    .trim()
                    .to_ascii_lowercase();
                if !SECTIONS.contains(&name.as_str()) {
                    return Err(p.err(line, format!("unknown section `[{name}]`")));
                }
                p.section_lines.entry(name.clone()).or_insert(line);
                section = Some(name);
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| p.err(line, format!("expected `key = value`, found `{content}`")))?;
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            let sec = section
                .as_deref()
                .ok_or_else(|| p.err(line, format!("key `{key}` outside any section")))?;
            let (canon, deg) =
                resolve(sec, &key).ok_or_else(|| p.err(line, format!("unknown key `{key}` in [{sec}]")))?;
            let full = format!("{sec}.{canon}");
            if let Some(prev) = p.lines.insert(full.clone(), line) {
                return Err(p.err(line, format!("`{key}` sets {full} again (first set on line {prev})")));
            }
            if let Some(&(_, _, _, range)) = SCALARS.iter().find(|(s, k, _, _)| *s == sec && *k == canon) {
                let mut x = parse_f64(value).ok_or_else(|| p.err(line, format!("`{key}`: not a number: `{value}`")))?;
                if deg {
                    x = x.to_radians();
                }
                range.check(x).map_err(|m| p.err(line, format!("`{key}` {m}")))?;
                scalars.insert(canon, x);
            } else {
                others.insert(canon, (value.to_string(), deg, line));
            }
        }

        let get = |k: &str, default: f64| scalars.get(k).copied().unwrap_or(default);

        // Satellite.
        let j = |a: &str, i: usize, jj: usize| get(a, jref[i][jj]);
        let (jxy, jxz, jyz) = (j("jxy", 0, 1), j("jxz", 0, 2), j("jyz", 1, 2));
        let inertia = Mat3::from_rows([
            [j("jxx", 0, 0), jxy, jxz],
            [jxy, j("jyy", 1, 1), jyz],
            [jxz, jyz, j("jzz", 2, 2)],
        ]);
        let rs = &reference.satellite;
        let satellite = SatelliteParams::new(
            inertia,
            get("omega_max", rs.omega_max()),
            get("u_max", rs.u_max()),
            get("d_max", rs.d_max()),
        )
        .map_err(|e| p.blame("satellite", plant_key(&e), e.to_string()))?;

        // Controller.
        let rc = &reference.control;
        let mut control = ControlParams {
            d_max: satellite.d_max(),
            gamma: get("gamma", rc.gamma),
            eta: get("eta", rc.eta),
            beta1: get("beta1", rc.beta1),
            beta2: get("beta2", rc.beta2),
            tau1: get("tau1", rc.tau1),
            tau3: get("tau3", rc.tau3),
            epsilon: get("epsilon", rc.epsilon),
            s_guard: get("s_guard", rc.s_guard),
            axis_guard: get("axis_guard", rc.axis_guard),
            ..*rc
        };
        if let Some((v, _, line)) = others.get("profile") {
            control.kind = ProfileKind::parse(v)
                .ok_or_else(|| p.err(*line, format!("`profile`: expected trapezoid or modified, found `{v}`")))?;
        }
        control
            .validate()
            .map_err(|e| p.blame("control", control_key(&e), e.to_string()))?;

        // Scenario.
        let rsc = &reference.scenario;
        let kind = match others.get("type") {
            None => "rest_to_rest".to_string(),
            Some((v, _, line)) => {
                let v = v.to_ascii_lowercase();
                if !["rest_to_rest", "target_staring", "desired_csv"].contains(&v.as_str()) {
                    return Err(p.err(
                        *line,
                        format!("`type`: expected rest_to_rest, target_staring or desired_csv, found `{v}`"),
                    ));
                }
                v
            }
        };
        // Keys that only make sense for one scenario type.
        let owned: [(&str, &[&str]); 3] = [
            ("rest_to_rest", &["axis", "angle"]),
            ("target_staring", &["altitude", "look_angle", "t_closest", "earth_radius", "mu"]),
            ("desired_csv", &["desired_csv"]),
        ];
        for (ty, keys) in owned {
            if ty == kind {
                continue;
            }
            for k in keys {
                if let Some(&line) = p.lines.get(&format!("scenario.{k}")) {
                    return Err(p.err(line, format!("`{k}` does not apply to scenario type {kind}")));
                }
            }
        }
        let desired = match kind.as_str() {
            "rest_to_rest" => {
                let axis = match others.get("axis") {
                    None => Vec3::X,
                    Some((v, _, line)) => parse_axis(v)
                        .filter(|a| a.norm() > 0.0)
                        .ok_or_else(|| p.err(*line, format!("`axis`: expected x, y, z or three numbers, found `{v}`")))?,
                };
                let angle = get("angle", std::f64::consts::FRAC_PI_2);
                if angle > std::f64::consts::PI {
                    return Err(p.blame("scenario", "angle", "`angle` must not exceed 180 degrees".into()));
                }
                DesiredSpec::RestToRest { axis, angle }
            }
            "target_staring" => {
                let g = StaringGeometry::default();
                DesiredSpec::TargetStaring(StaringGeometry {
                    altitude: get("altitude", g.altitude),
                    look_angle: get("look_angle", g.look_angle),
                    t_closest: get("t_closest", g.t_closest),
                    earth_radius: get("earth_radius", g.earth_radius),
                    mu: get("mu", g.mu),
                })
            }
            _ => match others.get("desired_csv") {
                Some((v, _, _)) => DesiredSpec::Csv(PathBuf::from(v)),
                None => {
                    return Err(p.blame("scenario", "type", "type desired_csv needs a `desired_csv` path".into()));
                }
            },
        };
        let mut initial = match others.get("initial") {
            None if kind == "rest_to_rest" => InitialAttitude::Identity,
            None => InitialAttitude::Reference,
            Some((v, _, line)) => match v.to_ascii_lowercase().as_str() {
                "identity" => InitialAttitude::Identity,
                "reference" => InitialAttitude::Reference,
                "desired" => InitialAttitude::Desired,
                _ => {
                    return Err(p.err(
                        *line,
                        format!("`initial`: expected identity, reference or desired, found `{v}`"),
                    ))
                }
            },
        };
        if let Some((v, _, line)) = others.get("initial_q") {
            if others.contains_key("initial") {
                return Err(p.err(*line, "`initial_q` conflicts with `initial`"));
            }
            let parts: Option<Vec<f64>> = v.split(',').map(parse_f64).collect();
            let q = match parts.as_deref() {
                Some(&[x, y, z, w]) => Quaternion::new(Vec3::new(x, y, z), w).ok(),
                _ => None,
            }
            .ok_or_else(|| p.err(*line, format!("`initial_q`: expected four numbers x, y, z, w, found `{v}`")))?;
            initial = InitialAttitude::Explicit(q);
        }
        let initial_omega = match others.get("initial_omega") {
            None => None,
            Some((v, deg, line)) => {
                let w = parse_vec(v).ok_or_else(|| p.err(*line, format!("`initial_omega`: expected three numbers, found `{v}`")))?;
                Some(if *deg { w * (std::f64::consts::PI / 180.0) } else { w })
            }
        };
        let disturbance = match others.get("disturbance") {
            None => rsc.disturbance,
            Some((v, _, line)) => {
                parse_bool(v).ok_or_else(|| p.err(*line, format!("`disturbance`: expected on or off, found `{v}`")))?
            }
        };
        let default_duration = if kind == "target_staring" { STARING_DURATION } else { rsc.duration };
        let scenario = ScenarioSpec {
            desired,
            initial,
            initial_omega,
            start_time: get("start_time", rsc.start_time),
            duration: get("duration", default_duration),
            control_frequency: get("frequency", rsc.control_frequency),
            dt: get("dt", rsc.dt),
            disturbance,
            theta_tol: get("theta_tol", rsc.theta_tol),
            omega_tol: get("omega_tol", rsc.omega_tol),
        };
        let ratio = 1.0 / (scenario.control_frequency * scenario.dt);
        if (ratio - ratio.round()).abs() > 1e-9 * ratio || ratio.round() < 1.0 {
            let key = if p.lines.contains_key("scenario.dt") { "dt" } else { "frequency" };
            return Err(p.blame(
                "scenario",
                key,
                format!(
                    "dt = {} s must divide the control period 1/{} s into whole substeps",
                    scenario.dt, scenario.control_frequency
                ),
            ));
        }

        // Run.
        let out = others.get("out").map(|(v, _, _)| PathBuf::from(v));
        let seed = match others.get("seed") {
            None => 0,
            Some((v, _, line)) => v
                .parse::<u64>()
                .map_err(|_| p.err(*line, format!("`seed`: expected a non-negative integer, found `{v}`")))?,
        };

        Ok(RunConfig {
            satellite,
            control,
            scenario,
            out,
            seed,
        })
    }

    /// Canonical text form; parsing it yields an equal configuration.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let n = |x: f64| format!("{x:?}");
        let v = |a: Vec3| format!("{:?}, {:?}, {:?}", a.x, a.y, a.z);
        let sat = &self.satellite;
        let j = sat.inertia().m;
        let _ = writeln!(s, "[satellite]");
        for (k, x) in [
            ("jxx", j[0][0]),
            ("jyy", j[1][1]),
            ("jzz", j[2][2]),
            ("jxy", j[0][1]),
            ("jxz", j[0][2]),
            ("jyz", j[1][2]),
            ("omega_max", sat.omega_max()),
            ("u_max", sat.u_max()),
            ("d_max", sat.d_max()),
        ] {
            let _ = writeln!(s, "{k} = {}", n(x));
        }
        let c = &self.control;
        let _ = writeln!(s, "\n[control]");
        for (k, x) in [
            ("gamma", c.gamma),
            ("eta", c.eta),
            ("beta1", c.beta1),
            ("beta2", c.beta2),
            ("tau1", c.tau1),
            ("tau3", c.tau3),
            ("epsilon", c.epsilon),
            ("s_guard", c.s_guard),
            ("axis_guard", c.axis_guard),
        ] {
            let _ = writeln!(s, "{k} = {}", n(x));
        }
        let _ = writeln!(s, "profile = {}", c.kind.as_str());

        let sc = &self.scenario;
        let _ = writeln!(s, "\n[scenario]");
        match &sc.desired {
            DesiredSpec::RestToRest { axis, angle } => {
                let _ = writeln!(s, "type = rest_to_rest\naxis = {}\nangle = {}", v(*axis), n(*angle));
            }
            DesiredSpec::TargetStaring(g) => {
                let _ = writeln!(s, "type = target_staring");
                for (k, x) in [
                    ("altitude", g.altitude),
                    ("look_angle", g.look_angle),
                    ("t_closest", g.t_closest),
                    ("earth_radius", g.earth_radius),
                    ("mu", g.mu),
                ] {
                    let _ = writeln!(s, "{k} = {}", n(x));
                }
            }
            DesiredSpec::Csv(p) => {
                let _ = writeln!(s, "type = desired_csv\ndesired_csv = {}", p.display());
            }
        }
        match sc.initial {
            InitialAttitude::Identity => {
                let _ = writeln!(s, "initial = identity");
            }
            InitialAttitude::Reference => {
                let _ = writeln!(s, "initial = reference");
            }
            InitialAttitude::Desired => {
                let _ = writeln!(s, "initial = desired");
            }
            InitialAttitude::Explicit(q) => {
                let a = q.to_array();
                let _ = writeln!(s, "initial_q = {:?}, {:?}, {:?}, {:?}", a[0], a[1], a[2], a[3]);
            }
        }
        if let Some(w) = sc.initial_omega {
            let _ = writeln!(s, "initial_omega = {}", v(w));
        }
        for (k, x) in [
            ("start_time", sc.start_time),
            ("duration", sc.duration),
            ("frequency", sc.control_frequency),
            ("dt", sc.dt),
            ("theta_tol", sc.theta_tol),
            ("omega_tol", sc.omega_tol),
        ] {
            let _ = writeln!(s, "{k} = {}", n(x));
        }
        let _ = writeln!(s, "disturbance = {}", if sc.disturbance { "on" } else { "off" });

        let _ = writeln!(s, "\n[run]");
        if let Some(o) = &self.out {
            let _ = writeln!(s, "out = {}", o.display());
        }
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }
}

fn control_key(e: &slewctl_core::controller::ControlError) -> &'static str {
    match e {
        slewctl_core::controller::ControlError::InvalidParameter { name, .. } => name,
        _ => "profile",
    }
}
