//! `slewctl` command line.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use slewctl_core::rateprofile::{ProfileInputs, ProfileKind, RateProfile};

use crate::config::RunConfig;
use crate::error::{CliError, EXIT_OK, EXIT_USAGE};
use crate::fmt_f64;
use crate::oracle;
use crate::run::run;
use crate::sweep::{parse_angles, parse_axes, parse_kinds, slew_sweep, write_sweep, SweepSpec};
use crate::telemetry::TelemetryWriter;

/// Oracle acceptance bound on `|ω_closed − ω_ODE|` [rad/s].
pub const ORACLE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "slewctl", version, about = "Constrained eigen-axis slew controller simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Args, Clone, Default)]
struct Common {
    /// Run configuration file (defaults to the reference setup)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file
    #[arg(long)]
    out: Option<PathBuf>,
    /// Control frequency override [Hz]
    #[arg(long)]
    freq: Option<f64>,
    /// RNG seed override (randomized checks only)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one scenario and write per-cycle telemetry CSV
    Run {
        #[command(flatten)]
        common: Common,
        /// Profile kind override (trapezoid or modified)
        #[arg(long)]
        kind: Option<String>,
    },
    /// Rest-to-rest slew-time sweep over axes, angles and profile kinds
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Axes, e.g. `x,y,z` or `x;1 1 0`
        #[arg(long, default_value = "x,y,z")]
        axes: String,
        /// Angles in degrees, `start:end:step` or a comma list
        #[arg(long, default_value = "10:180:10")]
        angles: String,
        #[arg(long, default_value = "trapezoid,modified")]
        kinds: String,
        /// Run length per cell [s] (default: from the configuration)
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Dump the regulating-rate profile (θ_e, ω_R) as CSV
    Profile {
        #[command(flatten)]
        common: Common,
        /// Regulating acceleration α_R [rad/s²]
        #[arg(long)]
        alpha: f64,
        /// Ramp-up duration [s] (default: from the configuration)
        #[arg(long)]
        tau1: Option<f64>,
        /// Ramp-down duration [s] (default: from the configuration)
        #[arg(long)]
        tau3: Option<f64>,
        /// Rate cap ω_Rmax [rad/s] (default: the configured ω_max)
        #[arg(long)]
        wmax: Option<f64>,
        /// trapezoid, modified or both
        #[arg(long, default_value = "both")]
        kind: String,
        /// Number of intervals over [0, 1.2 θ3]
        #[arg(long, default_value_t = 600)]
        points: usize,
    },
    /// Compare the closed-form profile against a time-domain ODE oracle
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Angles checked per trial
        #[arg(long, default_value_t = 1000)]
        points: usize,
    },
}

fn load_config(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(f) = common.freq {
        if !(f > 0.0 && f.is_finite()) {
            return Err(CliError::Usage(format!("--freq must be > 0, got {f}")));
        }
        cfg.scenario.control_frequency = f;
        let ratio = 1.0 / (f * cfg.scenario.dt);
        if (ratio - ratio.round()).abs() > 1e-9 * ratio || ratio.round() < 1.0 {
            return Err(CliError::Usage(format!(
                "--freq {f}: dt = {} s does not divide the control period",
                cfg.scenario.dt
            )));
        }
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(o) = &common.out {
        cfg.out = Some(o.clone());
    }
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn io_err(path: &str) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_string(),
        source,
    }
}

fn cmd_run(common: Common, kind: Option<String>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = load_config(&common)?;
    if let Some(k) = kind {
        cfg.control.kind = ProfileKind::parse(&k).ok_or_else(|| CliError::Usage(format!("--kind: unknown profile `{k}`")))?;
    }
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("telemetry.csv"));
    let mut writer = TelemetryWriter::create(&out)?;
    let summary = run(&cfg, &mut writer)?;
    let rows = writer.finish()?;
    let opt = |x: Option<f64>| x.map_or_else(|| "inf".to_string(), |v| format!("{v}"));
    let lines = [
        format!("telemetry={}", out.display()),
        format!("rows={rows}"),
        format!("slew_time={}", opt(summary.slew_time)),
        format!("first_entry={}", opt(summary.first_entry)),
        format!("max_rate_deg={}", summary.max_rate.to_degrees()),
        format!("max_torque={}", summary.max_torque),
        format!("final_theta_e_deg={}", summary.final_theta_e.to_degrees()),
        format!("final_omega_e_deg={}", summary.final_omega_e.to_degrees()),
        format!("saturated_cycles={}", summary.saturated_cycles),
        format!("cubic_max_scaled_residual={:e}", summary.cubic.max_scaled_residual),
    ];
    for l in lines {
        writeln!(stdout, "{l}").map_err(io_err("<stdout>"))?;
    }
    Ok(())
}

fn cmd_sweep(
    common: Common,
    axes: &str,
    angles: &str,
    kinds: &str,
    duration: Option<f64>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let mut cfg = load_config(&common)?;
    let spec = SweepSpec {
        axes: parse_axes(axes).ok_or_else(|| CliError::Usage(format!("--axes: cannot parse `{axes}`")))?,
        angles_deg: parse_angles(angles).ok_or_else(|| CliError::Usage(format!("--angles: cannot parse `{angles}`")))?,
        kinds: parse_kinds(kinds).ok_or_else(|| CliError::Usage(format!("--kinds: cannot parse `{kinds}`")))?,
    };
    if let Some(d) = duration {
        if !(d > 0.0 && d.is_finite()) {
            return Err(CliError::Usage(format!("--duration must be > 0, got {d}")));
        }
        cfg.scenario.duration = d;
    }
    let rows = slew_sweep(&cfg, &spec);
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("sweep.csv"));
    write_sweep(&rows, create(&out)?)?;
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    let unconverged = rows.iter().filter(|r| r.outcome.is_ok() && r.slew_time().is_none()).count();
    writeln!(
        stdout,
        "sweep={}\nrows={}\nfailed={failed}\nunconverged={unconverged}",
        out.display(),
        rows.len()
    )
    .map_err(io_err("<stdout>"))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_profile(
    common: Common,
    alpha: f64,
    tau1: Option<f64>,
    tau3: Option<f64>,
    wmax: Option<f64>,
    kind: &str,
    points: usize,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let cfg = load_config(&common)?;
    let inputs = ProfileInputs {
        alpha,
        tau1: tau1.unwrap_or(cfg.control.tau1),
        tau3: tau3.unwrap_or(cfg.control.tau3),
        omega_max: wmax.unwrap_or(cfg.satellite.omega_max()),
    };
    let kinds = match kind {
        "both" => vec![ProfileKind::Trapezoid, ProfileKind::Modified],
        k => vec![ProfileKind::parse(k).ok_or_else(|| CliError::Usage(format!("--kind: unknown profile `{k}`")))?],
    };
    if points == 0 {
        return Err(CliError::Usage("--points must be > 0".into()));
    }
    let profiles = kinds
        .iter()
        .map(|&k| RateProfile::build(inputs, k).map(|p| (k, p)))
        .collect::<Result<Vec<_>, _>>()?;
    let span = 1.2 * profiles.iter().map(|(_, p)| p.theta3).fold(0.0, f64::max);

    let mut sink: Box<dyn Write + '_> = match &cfg.out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(&mut *stdout),
    };
    let mut wr = csv::Writer::from_writer(&mut sink);
    wr.write_record(["kind", "theta", "omega_r", "segment", "bang_bang"])?;
    for (k, p) in &profiles {
        for i in 0..=points {
            let th = span * i as f64 / points as f64;
            let e = p.eval_detailed(th);
            let envelope = (2.0 * inputs.alpha * th).sqrt().min(inputs.omega_max);
            wr.write_record([
                k.as_str().to_string(),
                fmt_f64(th),
                fmt_f64(e.omega),
                (e.segment as u8).to_string(),
                fmt_f64(envelope),
            ])?;
        }
    }
    wr.flush().map_err(io_err("<profile output>"))?;
    Ok(())
}

fn cmd_oracle(common: Common, trials: usize, points: usize, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load_config(&common)?;
    if trials == 0 || points == 0 {
        return Err(CliError::Usage("--trials and --points must be > 0".into()));
    }
    let report = oracle::run_trials(trials, cfg.seed, points)?;
    if let Some(p) = &cfg.out {
        let mut wr = csv::Writer::from_writer(create(p)?);
        wr.write_record(["trial", "kind", "shape", "alpha", "tau1", "tau3", "omega_max", "max_deviation", "theta_at_max"])?;
        for (i, t) in report.trials.iter().enumerate() {
            let shape = match t.shape {
                slewctl_core::rateprofile::ProfileShape::Trapezoid => "trapezoid",
                slewctl_core::rateprofile::ProfileShape::Collapsed => "collapsed",
                slewctl_core::rateprofile::ProfileShape::Modified { collapsed: false } => "modified",
                slewctl_core::rateprofile::ProfileShape::Modified { collapsed: true } => "modified-collapsed",
            };
            wr.write_record([
                i.to_string(),
                t.kind.as_str().to_string(),
                shape.to_string(),
                fmt_f64(t.inputs.alpha),
                fmt_f64(t.inputs.tau1),
                fmt_f64(t.inputs.tau3),
                fmt_f64(t.inputs.omega_max),
                fmt_f64(t.max_deviation),
                fmt_f64(t.theta_at_max),
            ])?;
        }
        wr.flush().map_err(io_err("<oracle output>"))?;
    }
    writeln!(
        stdout,
        "trials={trials}\nseed={}\ntrapezoid={}\ncollapsed={}\nmodified={}\nmax_deviation={:e}",
        cfg.seed, report.trapezoid, report.collapsed, report.modified, report.max_deviation
    )
    .map_err(io_err("<stdout>"))?;
    if !(report.max_deviation <= ORACLE_TOLERANCE) {
        return Err(CliError::Oracle(format!(
            "max deviation {:e} rad/s exceeds {ORACLE_TOLERANCE:e}",
            report.max_deviation
        )));
    }
    Ok(())
}

/// Run the CLI with explicit arguments and streams; returns the exit code.
pub fn cli_main<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let _ = writeln!(stderr, "error[usage]: {}", e.kind());
            let _ = write!(stderr, "{}", e.render());
            return EXIT_USAGE;
        }
    };
    let result = match cli.command {
        Command::Run { common, kind } => cmd_run(common, kind, stdout),
        Command::Sweep {
            common,
            axes,
            angles,
            kinds,
            duration,
        } => cmd_sweep(common, &axes, &angles, &kinds, duration, stdout),
        Command::Profile {
            common,
            alpha,
            tau1,
            tau3,
            wmax,
            kind,
            points,
        } => cmd_profile(common, alpha, tau1, tau3, wmax, &kind, points, stdout),
        Command::Oracle { common, trials, points } => cmd_oracle(common, trials, points, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error[{}]: {e}", e.category());
            e.exit_code()
        }
    }
}
