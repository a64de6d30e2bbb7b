use std::fmt;
use std::path::Path;

use ermakov_core::{Error, ErrorCategory};
use serde::Serialize;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const NUMERICAL: i32 = 2;
    pub const PRECONDITION: i32 = 3;
}

/// A failed run: exit code plus a machine-readable diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub code: i32,
    pub category: &'static str,
    pub kind: String,
    pub message: String,
}

impl CliError {
    pub fn config(kind: &str, message: impl Into<String>) -> Self {
        CliError { code: exit::CONFIG, category: "config", kind: kind.into(), message: message.into() }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::config("io", format!("{}: {e}", path.display()))
    }

    /// Single-line JSON for standard error.
    pub fn diagnostic(&self, scenario: Option<&Path>) -> String {
        #[derive(Serialize)]
        struct Diagnostic<'a> {
            error: &'a CliError,
            #[serde(skip_serializing_if = "Option::is_none")]
            scenario: Option<String>,
        }
        crate::output::to_json_line(&Diagnostic { error: self, scenario: scenario.map(|p| p.display().to_string()) })
    }
}

fn kind_of(e: &Error) -> &'static str {
    match e {
        Error::Parse(_) => "parse",
        Error::Domain(_) => "domain",
        Error::InvalidSpec(_) => "invalid_spec",
        Error::InvalidInput(_) => "invalid_input",
        Error::Singular(_) => "singularity",
        Error::StepUnderflow { .. } => "step_underflow",
        Error::NonFinite { .. } => "non_finite",
        Error::MaxSteps(_) => "max_steps",
        Error::QuadratureNonConvergence { .. } => "quadrature",
        Error::Pole { .. } => "pole",
        Error::TurningPoint { .. } => "turning_point",
        Error::RootFinding { .. } => "root_finding",
        Error::Precondition(_) => "precondition",
        Error::NonPositiveLSquared { .. } => "non_positive_l_squared",
        Error::FlowEscape(_) => "flow_escape",
        Error::NotMonotone { .. } => "not_monotone",
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let (code, category) = match e.category() {
            ErrorCategory::Config => (exit::CONFIG, "config"),
            ErrorCategory::Numerical => (exit::NUMERICAL, "numerical"),
            ErrorCategory::Precondition => (exit::PRECONDITION, "precondition"),
        };
        CliError { code, category, kind: kind_of(&e).into(), message: e.to_string() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}): {}", self.kind, self.category, self.message)
    }
}

impl std::error::Error for CliError {}
