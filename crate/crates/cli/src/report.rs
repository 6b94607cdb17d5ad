//! Scenario execution and the JSON/CSV report.

use std::path::Path;
use std::time::Instant;

use emkahler::cohomology::kodaira_lattice;
use emkahler::conventions::NORM_CONVENTION;
use emkahler::geometry::{GeometryParams, GeometryRegistry};
use emkahler::tolerances::{DEFAULT_RESOLUTION, DEFAULT_SAMPLES_PER_AXIS};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::checks::{CheckRegistry, Context, Subject, Table};
use crate::error::ConfigError;
use crate::scenario::{self, GeometrySpec, Scenario};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: ScenarioStamp,
    pub environment: Environment,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioStamp {
    pub name: String,
    pub description: String,
    pub geometry: GeometrySpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub version: String,
    pub resolution: usize,
    pub samples_per_axis: usize,
    pub tolerance_scale: f64,
    pub deterministic: bool,
    /// SHA-256 of the norm convention text.
    pub norm_convention_hash: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    /// The check could not be evaluated.
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub check: String,
    pub module: String,
    pub status: Status,
    pub pass: bool,
    pub tolerance: Option<f64>,
    pub values: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub convergence: Vec<Table>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Wall-clock time; omitted from deterministic reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl Report {
    /// 0 when everything passed, 2 if any check could not be evaluated,
    /// 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        if self.checks.iter().any(|c| c.status == Status::Error) {
            2
        } else if self.pass {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub resolution: Option<usize>,
    pub tolerance_scale: f64,
    pub deterministic: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { resolution: None, tolerance_scale: 1.0, deterministic: false }
    }
}

pub fn norm_convention_hash() -> String {
    format!("{:x}", Sha256::digest(NORM_CONVENTION.as_bytes()))
}

fn build_subject(spec: &GeometrySpec, origin: &str) -> Result<Subject, ConfigError> {
    let bad = |m: String| ConfigError::Schema { path: origin.into(), message: format!("geometry: {m}") };
    match spec.kind.as_str() {
        "none" => Ok(Subject::None),
        "kodaira" => {
            let int = |k: &str| {
                spec.params
                    .get(k)
                    .and_then(Value::as_i64)
                    .ok_or_else(|| bad(format!("kodaira needs integer parameter '{k}'")))
            };
            let (lattice, invariants) =
                kodaira_lattice(int("p")?, int("q")?, int("tau")?).map_err(|e| bad(e.to_string()))?;
            Ok(Subject::Kodaira { lattice, invariants })
        }
        kind => {
            let params: GeometryParams =
                serde_json::from_value(Value::Object(spec.params.clone())).map_err(|e| bad(e.to_string()))?;
            let g = GeometryRegistry::with_builtins().build(kind, &params).map_err(|e| bad(e.to_string()))?;
            Ok(Subject::Geometry(g))
        }
    }
}

/// Validates the scenario, then runs its checks in declaration order.
pub fn run(s: &Scenario, origin: &str, opts: &RunOptions, registry: &CheckRegistry) -> Result<Report, ConfigError> {
    if !(opts.tolerance_scale > 0.0 && opts.tolerance_scale.is_finite()) {
        return Err(ConfigError::Invalid(format!("tolerance scale must be positive, got {}", opts.tolerance_scale)));
    }
    if opts.resolution == Some(0) {
        return Err(ConfigError::Invalid("resolution must be positive".into()));
    }
    let subject = build_subject(&s.geometry, origin)?;
    scenario::validate(s, registry, &subject.capabilities(), origin)?;
    let resolution = opts.resolution.or(s.resolution).unwrap_or(DEFAULT_RESOLUTION);
    let samples = s.samples_per_axis.unwrap_or(DEFAULT_SAMPLES_PER_AXIS);
    let ctx = Context::new(subject, resolution, samples, opts.tolerance_scale);

    let mut checks = Vec::with_capacity(s.checks.len());
    for spec in &s.checks {
        let check = registry.get(&spec.check).expect("validated");
        let mut rec = CheckRecord {
            name: spec.label().to_string(),
            check: spec.check.clone(),
            module: check.module().to_string(),
            status: Status::Skipped,
            pass: false,
            tolerance: spec.tolerance,
            values: Map::new(),
            convergence: Vec::new(),
            error: None,
            elapsed_ms: None,
        };
        if spec.skip {
            checks.push(rec);
            continue;
        }
        let start = Instant::now();
        match check.run(&ctx, &spec.params, spec.tolerance) {
            Ok(o) => {
                rec.status = if o.pass { Status::Pass } else { Status::Fail };
                rec.pass = o.pass;
                rec.tolerance = o.tolerance;
                rec.values = o.values;
                rec.convergence = o.tables;
            }
            Err(e) => {
                rec.status = Status::Error;
                rec.error = Some(e.to_string());
            }
        }
        if !opts.deterministic {
            rec.elapsed_ms = Some(start.elapsed().as_millis() as u64);
        }
        checks.push(rec);
    }
    let pass = checks.iter().all(|c| matches!(c.status, Status::Pass | Status::Skipped));
    Ok(Report {
        scenario: ScenarioStamp {
            name: s.name.clone(),
            description: s.description.clone(),
            geometry: s.geometry.clone(),
        },
        environment: Environment {
            version: env!("CARGO_PKG_VERSION").to_string(),
            resolution,
            samples_per_axis: samples,
            tolerance_scale: opts.tolerance_scale,
            deterministic: opts.deterministic,
            norm_convention_hash: norm_convention_hash(),
        },
        checks,
        pass,
    })
}

fn file_stem(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

/// One CSV per convergence table, columns `resolution,residual`. Returns the
/// written paths.
pub fn write_csv(report: &Report, dir: &Path) -> Result<Vec<String>, ConfigError> {
    let werr = |p: &Path, source| ConfigError::Write { path: p.display().to_string(), source };
    std::fs::create_dir_all(dir).map_err(|e| werr(dir, e))?;
    let mut written = Vec::new();
    for c in &report.checks {
        for t in &c.convergence {
            let path = dir.join(format!(
                "{}_{}_{}.csv",
                file_stem(&report.scenario.name),
                file_stem(&c.name),
                file_stem(&t.name)
            ));
            let mut body = String::from("resolution,residual\n");
            for (n, r) in &t.rows {
                body.push_str(&format!("{n},{r:e}\n"));
            }
            std::fs::write(&path, body).map_err(|e| werr(&path, e))?;
            written.push(path.display().to_string());
        }
    }
    Ok(written)
}
