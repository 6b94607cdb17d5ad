//! Scenario documents (JSON or TOML) and their validation.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::checks::{Capabilities, CheckRegistry};
use crate::error::ConfigError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub geometry: GeometrySpec,
    /// Quadrature nodes per axis; the command line may override it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_per_axis: Option<usize>,
    pub checks: Vec<CheckSpec>,
    #[serde(default, skip_serializing_if = "Output::is_empty")]
    pub output: Output,
}

/// `kind` is a registered geometry name, `kodaira` for the lattice-only
/// family, or `none`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    pub params: serde_json::Map<String, Value>,
}

impl Default for GeometrySpec {
    fn default() -> Self {
        GeometrySpec { kind: "none".into(), params: serde_json::Map::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub check: String,
    /// Distinguishes repeated checks in the report; defaults to `check`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub skip: bool,
    #[serde(default = "empty_object", skip_serializing_if = "is_empty_object")]
    pub params: Value,
}

impl CheckSpec {
    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.check)
    }
}

fn empty_object() -> Value {
    Value::Object(serde_json::Map::new())
}

fn is_empty_object(v: &Value) -> bool {
    v.as_object().is_some_and(|m| m.is_empty())
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

impl Output {
    fn is_empty(&self) -> bool {
        self.report.is_none() && self.csv.is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Toml,
}

impl Format {
    /// By extension; anything that is not `.toml` is read as JSON.
    pub fn of(path: &str) -> Format {
        match Path::new(path).extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("toml") => Format::Toml,
            _ => Format::Json,
        }
    }
}

pub fn parse(text: &str, format: Format, origin: &str) -> Result<Scenario, ConfigError> {
    let schema = |message: String| ConfigError::Schema { path: origin.to_string(), message };
    match format {
        Format::Json => {
            serde_json::from_str(text).map_err(|e| schema(format!("line {}, column {}: {e}", e.line(), e.column())))
        }
        Format::Toml => toml::from_str(text).map_err(|e| {
            let at = e
                .span()
                .map(|s| {
                    let line = text[..s.start].matches('\n').count() + 1;
                    format!("line {line}: ")
                })
                .unwrap_or_default();
            schema(format!("{at}{}", e.message()))
        }),
    }
}

pub fn load(path: &str) -> Result<Scenario, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
    parse(&text, Format::of(path), path)
}

/// Everything that can be checked without evaluating geometry: check names,
/// parameters, tolerances, labels and subject compatibility.
pub fn validate(s: &Scenario, registry: &CheckRegistry, caps: &Capabilities, origin: &str) -> Result<(), ConfigError> {
    let at = |i: usize, c: &CheckSpec, m: String| ConfigError::Schema {
        path: origin.to_string(),
        message: format!("checks[{i}] ({}): {m}", c.check),
    };
    if s.checks.is_empty() {
        return Err(ConfigError::Schema { path: origin.into(), message: "scenario has no checks".into() });
    }
    if s.resolution == Some(0) || s.samples_per_axis == Some(0) {
        return Err(ConfigError::Schema {
            path: origin.into(),
            message: "resolution and samples_per_axis must be positive".into(),
        });
    }
    let mut labels = std::collections::BTreeSet::new();
    for (i, c) in s.checks.iter().enumerate() {
        let check = registry.get(&c.check).ok_or_else(|| at(i, c, "unknown check".into()))?;
        if let Some(t) = c.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return Err(at(i, c, format!("tolerance must be positive, got {t}")));
            }
        }
        if !c.params.is_object() {
            return Err(at(i, c, "params must be a table".into()));
        }
        check.validate(&c.params).map_err(|m| at(i, c, m))?;
        if !caps.satisfies(check.needs()) {
            return Err(at(i, c, format!("needs {}, but the scenario geometry provides {caps}", check.needs())));
        }
        if !labels.insert(c.label().to_string()) {
            return Err(at(i, c, format!("duplicate label '{}'", c.label())));
        }
    }
    Ok(())
}
