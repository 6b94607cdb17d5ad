//! Scenarios shipped inside the binary.

use crate::checks::CheckRegistry;
use crate::error::ConfigError;
use crate::scenario::{self, Format, Scenario};

pub struct Bundled {
    pub file: &'static str,
    pub text: &'static str,
}

macro_rules! bundled {
    ($($file:literal),* $(,)?) => {
        &[$(Bundled { file: $file, text: include_str!(concat!("../scenarios/", $file)) }),*]
    };
}

pub const BUNDLED: &[Bundled] = bundled![
    "algebraic_identities.json",
    "em_flat_torus.json",
    "em_sphere_product.json",
    "em_hyperbolic.json",
    "em_fubini_study.toml",
    "kahler_identity.json",
    "integral_identities_sphere.json",
    "integral_identities_hyperbolic.toml",
    "calabi_equality.json",
    "bounds_fubini_study.json",
    "first_variation.json",
    "kodaira_counterexample.json",
    "cross_checks.json",
    "hitchin_thorpe.json",
];

impl Bundled {
    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        scenario::parse(self.text, Format::of(self.file), self.file)
    }

    pub fn stem(&self) -> &'static str {
        self.file.rsplit_once('.').map_or(self.file, |(s, _)| s)
    }
}

/// Finds a bundled scenario by file name, stem or scenario name.
pub fn find(name: &str) -> Option<&'static Bundled> {
    BUNDLED.iter().find(|b| b.file == name || b.stem() == name || b.scenario().is_ok_and(|s| s.name == name))
}

pub struct Entry {
    pub file: &'static str,
    pub name: String,
    pub geometry: String,
    pub modules: Vec<String>,
    pub description: String,
}

/// Catalog entries whose name, file, geometry or module contains `filter`.
pub fn list(filter: Option<&str>, registry: &CheckRegistry) -> Result<Vec<Entry>, ConfigError> {
    let mut out = Vec::new();
    for b in BUNDLED {
        let s = b.scenario()?;
        let mut modules: Vec<String> =
            s.checks.iter().filter_map(|c| registry.get(&c.check).map(|k| k.module().to_string())).collect();
        modules.sort();
        modules.dedup();
        let e = Entry { file: b.file, name: s.name, geometry: s.geometry.kind, modules, description: s.description };
        let keep = match filter {
            None => true,
            Some(f) => {
                e.name.contains(f)
                    || e.file.contains(f)
                    || e.geometry.contains(f)
                    || e.modules.iter().any(|m| m.contains(f))
            }
        };
        if keep {
            out.push(e);
        }
    }
    Ok(out)
}
