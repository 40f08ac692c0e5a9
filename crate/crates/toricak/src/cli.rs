//! Command-line definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::GlobalFlags;

#[derive(Debug, Parser)]
#[command(name = "toricak", version, about = "Toric almost-Kähler soliton computations")]
pub struct Cli {
    /// Catalog name or path to a polytope JSON file.
    #[arg(long, global = true)]
    pub polytope: Option<String>,
    /// Directory for the run report and any dumps.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON config file; flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Points per axis of the interior check grid.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    pub fn global_flags(&self) -> GlobalFlags {
        GlobalFlags {
            polytope: self.polytope.clone(),
            out: self.out.clone(),
            config: self.config.clone(),
            tol: self.tol,
            grid: self.grid,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the shipped polytopes.
    Catalog,
    /// Curvature, soliton residual and boundary checks for a metric field.
    Check(CheckArgs),
    /// The Futaki invariant on the affine basis for a given vector field.
    Futaki(VectorArgs),
    /// Solve for the soliton vector field.
    SolitonVf,
    /// Build and verify a compactly supported deformation family.
    Deform(DeformArgs),
    /// Solve the soliton equation for a toric metric.
    Solve(SolveArgs),
    /// Summarize run reports from files or directories.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct VectorArgs {
    /// Coefficients `a_1..a_n[,a_{n+1}]` of `f = a·z + a_{n+1}`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub a: Option<Vec<f64>>,
    /// Use the solved soliton vector field.
    #[arg(long, conflicts_with = "a")]
    pub auto_vf: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Requirement {
    Boundary,
    Soliton,
    Identity,
    Kahler,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub vector: VectorArgs,
    /// `guillemin`, `identity`, or `csv:PATH`.
    #[arg(long, default_value = "guillemin")]
    pub field: String,
    /// Checks that decide the exit code.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "boundary,soliton,identity")]
    pub require: Vec<Requirement>,
    /// Write curvature.csv and field.csv to --out.
    #[arg(long)]
    pub dump: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Background {
    Guillemin,
    Solve,
}

#[derive(Debug, Clone, Args)]
pub struct DeformArgs {
    #[command(flatten)]
    pub vector: VectorArgs,
    /// Deformation parameters to verify; defaults to half of each end of the
    /// admissible interval.
    #[arg(long = "t", value_delimiter = ',', allow_hyphen_values = true)]
    pub t: Vec<f64>,
    /// JSON deformation spec; replaces --pair/--u/--v/--rest/--amplitude.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Coordinate pair `i,l` (1-based, i < l).
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub pair: Option<Vec<usize>>,
    /// Support of `u` in `z_i`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub u: Option<Vec<f64>>,
    /// Support of `v` in `z_l`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub v: Option<Vec<f64>>,
    /// Support of the cutoff in every other coordinate.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub rest: Option<Vec<f64>>,
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Allowed soliton residual of the background on the support box.
    #[arg(long)]
    pub soliton_tol: Option<f64>,
    #[arg(long, value_enum, default_value = "guillemin")]
    pub background: Background,
    /// Write field_t<k>.csv for each t to --out.
    #[arg(long)]
    pub dump: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub vector: VectorArgs,
    /// Collocation points per axis.
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Total degree of the polynomial correction.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Start from a facet-product bump of this amplitude.
    #[arg(long, allow_hyphen_values = true)]
    pub bump: Option<f64>,
    /// Add uniform noise of this size to the starting coefficients (uses --seed).
    #[arg(long)]
    pub perturb: Option<f64>,
    /// Write field.csv to --out.
    #[arg(long)]
    pub dump: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Report files, or directories to scan for `*.json`.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
}
