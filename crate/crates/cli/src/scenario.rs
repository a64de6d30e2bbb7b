//! Scenario files: JSON, unknown keys rejected.

use std::f64::consts::FRAC_PI_4;
use std::path::Path;
use std::sync::Arc;

use ermakov_core::shapefn::{ShapeExpr, Variable};
use ermakov_core::systems::{CartState, SpecParts, SystemClass, SystemSpec};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub system: Option<SystemSection>,
    pub ic: Option<Ic>,
    pub t_span: Option<[f64; 2]>,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default = "default_theta_ref")]
    pub theta_ref: f64,
    #[serde(default = "default_theta_samples")]
    pub theta_samples: usize,
    #[serde(default)]
    pub report: ReportOptions,
    #[serde(default)]
    pub audit: AuditSection,
    #[serde(default)]
    pub symmetry: SymmetrySection,
    #[serde(default)]
    pub flow: FlowSection,
    #[serde(default)]
    pub pullback: PullbackSection,
}

fn default_rtol() -> f64 {
    1e-10
}
fn default_atol() -> f64 {
    1e-12
}
fn default_theta_ref() -> f64 {
    FRAC_PI_4
}
fn default_theta_samples() -> usize {
    200
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub class: String,
    pub f: Option<String>,
    pub g: Option<String>,
    pub h: Option<String>,
    #[serde(alias = "C")]
    pub c: Option<f64>,
    pub w: Option<String>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ic {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportOptions {
    /// Write every n-th trajectory node.
    #[serde(default = "one")]
    pub trajectory_stride: usize,
}

fn one() -> usize {
    1
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { trajectory_stride: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConditionSpec {
    Eq25,
    ToyL,
    Custom(String),
}

impl<'de> Deserialize<'de> for ConditionName {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Name(String),
            Custom { custom: String },
        }
        match Raw::deserialize(d)? {
            Raw::Name(n) if n == "eq_2_5" => Ok(ConditionName(ConditionSpec::Eq25)),
            Raw::Name(n) if n == "toy_L" => Ok(ConditionName(ConditionSpec::ToyL)),
            Raw::Name(n) => Err(serde::de::Error::custom(format!(
                "unknown condition '{n}' (expected eq_2_5, toy_L or {{\"custom\": ...}})"
            ))),
            Raw::Custom { custom } => Ok(ConditionName(ConditionSpec::Custom(custom))),
        }
    }
}

/// A condition as written in a scenario: `"eq_2_5"`, `"toy_L"` or
/// `{"custom": "<L^2 as an expression in t>"}`.
#[derive(Debug, Clone)]
pub struct ConditionName(pub ConditionSpec);

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSection {
    pub conditions: Option<Vec<ConditionName>>,
    #[serde(default = "default_audit_range")]
    pub theta_range: [f64; 2],
    #[serde(default = "default_audit_samples")]
    pub samples: usize,
}

fn default_audit_range() -> [f64; 2] {
    [std::f64::consts::FRAC_PI_6, std::f64::consts::FRAC_PI_3]
}
fn default_audit_samples() -> usize {
    11
}

impl Default for AuditSection {
    fn default() -> Self {
        AuditSection { conditions: None, theta_range: default_audit_range(), samples: default_audit_samples() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedGenerator {
    pub label: String,
    pub generator: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedAnsatz {
    pub label: String,
    pub generator: String,
    pub unknowns: Vec<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetrySection {
    /// Generators to check; the printed and corrected catalogs when absent.
    pub generators: Option<Vec<NamedGenerator>>,
    /// Ansatz families to solve; the built-in families when absent.
    pub ansatze: Option<Vec<NamedAnsatz>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_flow_tol")]
    pub tol: f64,
    #[serde(default = "default_reference_samples")]
    pub reference_samples: usize,
}

fn default_epsilons() -> Vec<f64> {
    vec![0.01, 0.1]
}
fn default_flow_tol() -> f64 {
    1e-6
}
fn default_reference_samples() -> usize {
    600
}

impl Default for FlowSection {
    fn default() -> Self {
        FlowSection {
            epsilons: default_epsilons(),
            tol: default_flow_tol(),
            reference_samples: default_reference_samples(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PullbackSection {
    /// Real-form labels such as `"G2"` or `"Re G6+"`; all nine when absent.
    pub generators: Option<Vec<String>>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| CliError::config("scenario", e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::config("scenario", m));
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return bad("rtol and atol must be positive".into());
        }
        if self.theta_samples < 8 {
            return bad(format!("theta_samples must be at least 8, got {}", self.theta_samples));
        }
        if let Some([a, b]) = self.t_span {
            if !(a.is_finite() && b.is_finite() && b > a) {
                return bad(format!("t_span must be increasing, got [{a}, {b}]"));
            }
        }
        if self.report.trajectory_stride == 0 {
            return bad("report.trajectory_stride must be positive".into());
        }
        if self.audit.samples == 0 {
            return bad("audit.samples must be positive".into());
        }
        if let Some(section) = &self.system {
            build_spec(section)?;
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<Arc<SystemSpec<f64>>, CliError> {
        let section = self.system.as_ref().ok_or_else(|| CliError::config("scenario", "missing 'system'"))?;
        Ok(Arc::new(build_spec(section)?))
    }

    pub fn initial_state(&self) -> Result<(CartState<f64>, f64), CliError> {
        let ic = self.ic.ok_or_else(|| CliError::config("scenario", "missing 'ic'"))?;
        let [t0, t1] = self.t_span.ok_or_else(|| CliError::config("scenario", "missing 't_span'"))?;
        Ok((CartState::new(t0, ic.x, ic.y, ic.vx, ic.vy), t1))
    }
}

fn expr(name: &str, text: &Option<String>, forbidden: Variable) -> Result<Option<ShapeExpr>, CliError> {
    let Some(text) = text else { return Ok(None) };
    let e = ShapeExpr::parse(text).map_err(|e| CliError::config("parse", format!("{name}: {e}")))?;
    if e.variable() == Some(forbidden) {
        let v = if forbidden == Variable::T { "t" } else { "s" };
        return Err(CliError::config("invalid_spec", format!("{name} may not depend on {v}")));
    }
    Ok(Some(e))
}

pub fn build_spec(section: &SystemSection) -> Result<SystemSpec<f64>, CliError> {
    let class = SystemClass::from_name(&section.class).ok_or_else(|| {
        CliError::config(
            "invalid_spec",
            format!("unknown class '{}' (expected kepler_ermakov, generalized or toy)", section.class),
        )
    })?;
    let parts = SpecParts {
        f: expr("f", &section.f, Variable::T)?,
        g: expr("g", &section.g, Variable::T)?,
        h: expr("h", &section.h, Variable::T)?,
        c: section.c,
        w: expr("w", &section.w, Variable::S)?,
    };
    Ok(SystemSpec::new(class, parts)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scenario() {
        let s = Scenario::parse(
            r#"{"system": {"class": "toy"}, "ic": {"x": 1, "y": 1, "vx": 0, "vy": 0}, "t_span": [0, 10]}"#,
        )
        .unwrap();
        assert_eq!(s.theta_samples, 200);
        assert_eq!(s.theta_ref, FRAC_PI_4);
        assert!(s.spec().is_ok());
    }

    #[test]
    fn rejections() {
        let cases = [
            r#"{"sytem": {}}"#,
            r#"{"system": {"class": "toy", "f": "1"}}"#,
            r#"{"system": {"class": "nope"}}"#,
            r#"{"system": {"class": "generalized", "f": "t"}}"#,
            r#"{"system": {"class": "toy", "w": "s"}}"#,
            r#"{"system": {"class": "toy", "w": "sin("}}"#,
            r#"{"t_span": [1, 0]}"#,
            r#"{"theta_samples": 3}"#,
            r#"{"audit": {"conditions": ["nope"]}}"#,
        ];
        for c in cases {
            let err = Scenario::parse(c).unwrap_err();
            assert_eq!(err.code, crate::error::exit::CONFIG, "{c}");
        }
    }

    #[test]
    fn conditions() {
        let s = Scenario::parse(r#"{"audit": {"conditions": ["toy_L", "eq_2_5", {"custom": "1/t"}]}}"#).unwrap();
        let c = s.audit.conditions.unwrap();
        assert!(matches!(c[2].0, ConditionSpec::Custom(ref t) if t == "1/t"));
    }
}
