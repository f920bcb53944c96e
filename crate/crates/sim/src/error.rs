//! Command-line error reporting: every failure maps to a category and exit code.

use slewctl_core::controller::ControlError;
use slewctl_core::rateprofile::ProfileError;
use slewctl_core::scenario::SimError;

use crate::config::ConfigError;
use crate::desired_csv::DesiredCsvError;
use crate::run::RunError;
use crate::telemetry::TelemetryError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Telemetry(#[from] TelemetryError),
    #[error("profile: {0}")]
    Profile(#[from] ProfileError),
    #[error("io: {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    /// The oracle ran but the deviation exceeded its bound.
    #[error("{0}")]
    Oracle(String),
}

fn profile_category(e: &ProfileError) -> &'static str {
    match e {
        ProfileError::NonPositive(_) | ProfileError::NegativeArgument(_) => "invalid-argument",
        ProfileError::BudgetExhausted { .. } => "saturated-feedforward",
        ProfileError::Infeasible { .. } => "infeasible-command",
    }
}

fn sim_category(e: &SimError) -> &'static str {
    match e {
        SimError::Definition(_) | SimError::Desired(_) => "scenario",
        SimError::Control { error, .. } => match error {
            ControlError::InvalidParameter { .. } => "config",
            ControlError::Profile(p) => profile_category(p),
            ControlError::Fault { .. } => "controller-fault",
        },
    }
}

impl CliError {
    /// Stable machine-readable category printed as `error[category]`.
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(ConfigError::Io { .. }) => "io",
            CliError::Config(_) => "config",
            CliError::Run(RunError::Sim(e)) => sim_category(e),
            CliError::Run(RunError::DesiredCsv(DesiredCsvError::Io { .. })) => "io",
            CliError::Run(RunError::DesiredCsv(_)) => "desired-csv",
            CliError::Telemetry(_) | CliError::Io { .. } | CliError::Csv(_) => "io",
            CliError::Profile(e) => profile_category(e),
            CliError::Oracle(_) => "oracle",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_RUN,
        }
    }
}
