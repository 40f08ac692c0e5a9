//! Run settings. Precedence: command-line flags, then the JSON config file,
//! then built-in defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    pub resolution: Option<usize>,
    pub degree: Option<usize>,
    pub max_iter: Option<usize>,
    pub damping: Option<f64>,
    pub bump: Option<f64>,
    pub perturb: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformSection {
    pub spec: Option<PathBuf>,
    pub amplitude: Option<f64>,
    pub t: Option<Vec<f64>>,
    pub soliton_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub polytope: Option<String>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub grid: Option<usize>,
    pub seed: Option<u64>,
    pub margin: Option<f64>,
    #[serde(default)]
    pub solve: SolveSection,
    #[serde(default)]
    pub deform: DeformSection,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("malformed config {}: {e}", path.display())))
    }
}

/// Global flags as given on the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GlobalFlags {
    pub polytope: Option<String>,
    pub out: Option<PathBuf>,
    pub config: Option<PathBuf>,
    pub tol: Option<f64>,
    pub grid: Option<usize>,
    pub seed: Option<u64>,
}

pub const DEFAULT_GRID: usize = 20;
pub const DEFAULT_MARGIN: f64 = 0.05;
pub const DEFAULT_SEED: u64 = 0;

/// Resolved global settings plus the config-file sections.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub polytope: Option<String>,
    pub out: Option<PathBuf>,
    /// Explicit tolerance; each command has its own default.
    pub tol: Option<f64>,
    pub grid: usize,
    pub seed: u64,
    pub margin: f64,
    pub file: ConfigFile,
}

impl Settings {
    pub fn resolve(flags: &GlobalFlags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let s = Self {
            polytope: flags.polytope.clone().or_else(|| file.polytope.clone()),
            out: flags.out.clone().or_else(|| file.out.clone()),
            tol: flags.tol.or(file.tol),
            grid: flags.grid.or(file.grid).unwrap_or(DEFAULT_GRID),
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            margin: file.margin.unwrap_or(DEFAULT_MARGIN),
            file,
        };
        if let Some(t) = s.tol {
            if t.is_nan() || t <= 0.0 {
                return Err(CliError::Input(format!("--tol must be positive, got {t}")));
            }
        }
        if s.grid < 2 {
            return Err(CliError::Input(format!("--grid must be at least 2, got {}", s.grid)));
        }
        Ok(s)
    }

    pub fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    pub fn polytope_spec(&self) -> Result<&str, CliError> {
        self.polytope
            .as_deref()
            .ok_or_else(|| CliError::Input("--polytope is required for this command".into()))
    }
}
