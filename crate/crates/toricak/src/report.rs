//! The JSON document every command emits.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use toricak_core::DelzantPolytope;

use crate::format::polytope_hash;
use crate::{exit, CliError};

pub const SCHEMA: &str = "toricak.run/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeInfo {
    pub name: Option<String>,
    pub hash: String,
    pub dim: usize,
    pub facets: usize,
}

impl From<&DelzantPolytope> for PolytopeInfo {
    fn from(p: &DelzantPolytope) -> Self {
        Self {
            name: p.name().map(str::to_owned),
            hash: polytope_hash(p),
            dim: p.dim(),
            facets: p.facets().len(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Inputs {
    pub polytope: Option<PolytopeInfo>,
    pub a: Option<Vec<f64>>,
    pub config: BTreeMap<String, Value>,
}

/// One tolerance check; `pass` is `value < tolerance` unless stated otherwise
/// in `rule`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub value: f64,
    pub tolerance: f64,
    pub rule: String,
    pub pass: bool,
}

impl Check {
    pub fn below(value: f64, tolerance: f64) -> Self {
        Self {
            value,
            tolerance,
            rule: "value < tolerance".into(),
            pass: value < tolerance,
        }
    }

    pub fn above(value: f64, threshold: f64) -> Self {
        Self {
            value,
            tolerance: threshold,
            rule: "value > tolerance".into(),
            pass: value > threshold,
        }
    }

    pub fn flag(ok: bool) -> Self {
        Self {
            value: if ok { 1.0 } else { 0.0 },
            tolerance: 1.0,
            rule: "value == tolerance".into(),
            pass: ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub command: String,
    pub inputs: Inputs,
    pub outputs: BTreeMap<String, Value>,
    pub files: Vec<String>,
    pub checks: BTreeMap<String, Check>,
    pub pass: bool,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self {
            schema: SCHEMA.into(),
            command: command.into(),
            inputs: Inputs::default(),
            outputs: BTreeMap::new(),
            files: Vec::new(),
            checks: BTreeMap::new(),
            pass: true,
            wall_time_s: 0.0,
        }
    }

    pub fn with_polytope(mut self, p: &DelzantPolytope) -> Self {
        self.inputs.polytope = Some(p.into());
        self
    }

    pub fn config(&mut self, key: &str, value: impl Serialize) {
        self.inputs
            .config
            .insert(key.into(), serde_json::to_value(value).expect("config values serialize"));
    }

    pub fn output(&mut self, key: &str, value: impl Serialize) {
        self.outputs
            .insert(key.into(), serde_json::to_value(value).expect("outputs serialize"));
    }

    pub fn check(&mut self, key: &str, check: Check) {
        self.pass &= check.pass;
        self.checks.insert(key.into(), check);
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            exit::OK
        } else {
            exit::TOLERANCE_FAILURE
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Writes `<dir>/<command>.json` and returns its path.
    pub fn write_to(&self, dir: &Path) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.json", self.command));
        std::fs::write(&path, self.to_json() + "\n")?;
        Ok(path)
    }
}

/// The report with the timing field zeroed, for byte comparisons.
pub fn strip_wall_time(json: &str) -> Result<String, CliError> {
    let mut v: Value = serde_json::from_str(json)?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove("wall_time_s");
    }
    Ok(serde_json::to_string_pretty(&v)?)
}
