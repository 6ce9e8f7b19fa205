use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "kfwer",
    version,
    about = "Knockoff selection with k-FWER control"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build equicorrelated knockoffs for a design matrix.
    Construct(ConstructArgs),
    /// Select variables with k-FWER control.
    Select(SelectArgs),
    /// Select under a PFER or FDX target.
    Analyze(AnalyzeArgs),
    /// Run a Monte Carlo sweep.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ConstructArgs {
    /// Headered CSV; every column is a design column.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Pad with zero rows when p <= n < 2p.
    #[arg(long)]
    pub allow_row_augment: bool,
}

/// Lasso path overrides.
#[derive(Debug, Clone, Args, Serialize)]
pub struct PathArgs {
    #[arg(long, default_value_t = 200)]
    pub grid_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub grid_ratio: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub cd_tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
}

impl PathArgs {
    pub fn spec(&self) -> kfwer_core::PathSpec {
        kfwer_core::PathSpec {
            grid_size: self.grid_size,
            grid_ratio: self.grid_ratio,
            cd_tol: self.cd_tol,
            max_iters: self.max_iters,
        }
    }
}

/// Input and output options shared by `select` and `analyze`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct DataArgs {
    /// Headered CSV with the response in one named column.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub response: String,
    /// Drop columns with fewer nonzero entries after removing rows with a
    /// missing response.
    #[arg(long, default_value_t = 1)]
    pub min_mutations: usize,
    /// Center the response and design columns before normalizing.
    #[arg(long)]
    pub center: bool,
    /// Allow p <= n < 2p by padding rows.
    #[arg(long)]
    pub allow_row_augment: bool,
    /// Labels counted as true discoveries, one per line.
    #[arg(long)]
    pub panel: Option<PathBuf>,
    /// Also run the p-value baselines.
    #[arg(long)]
    pub baselines: bool,
    /// Step-up critical values, one per line (flat k*alpha/p otherwise).
    #[arg(long)]
    pub stepup_constants: Option<PathBuf>,
    /// Null draws for the step-down baseline.
    #[arg(long, default_value_t = 2000)]
    pub stepdown_draws: usize,
    /// Also report the knockoff+ FDR selection at this level.
    #[arg(long)]
    pub fdr_q: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-variable report; the result and manifest files are written next
    /// to it with `.json` and `.manifest.json` extensions.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub path: PathArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SelectArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long)]
    pub no_randomize: bool,
    #[arg(long)]
    pub no_topup: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Expected number of false discoveries to tolerate.
    #[arg(long)]
    pub pfer: Option<f64>,
    /// FDX exceedance level, augmenting the k-FWER selection.
    #[arg(long)]
    pub fdx_gamma: Option<f64>,
    #[arg(long)]
    pub k: Option<u32>,
    /// FDX exceedance level, searching over k.
    #[arg(long)]
    pub rw_gamma: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long)]
    pub no_randomize: bool,
    #[arg(long)]
    pub no_topup: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetArg {
    Desk,
    Paper,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepArg {
    Rho,
    Nnz,
    Magnitude,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "desk")]
    pub preset: PresetArg,
    #[arg(long, value_enum, default_value = "rho")]
    pub sweep: SweepArg,
    /// Comma-separated grid values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub grid: Vec<f64>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated subset of knockoffs,holm,stepdown,stepup.
    #[arg(long, value_delimiter = ',')]
    pub procedures: Option<Vec<String>>,
    #[arg(long)]
    pub stepup_constants: Option<PathBuf>,
    /// Draw coefficient signs at random instead of all positive.
    #[arg(long)]
    pub random_signs: bool,
    /// Keep one design per grid point.
    #[arg(long)]
    pub fixed_design: bool,
    #[arg(long)]
    pub no_randomize: bool,
    #[arg(long)]
    pub no_topup: bool,
    #[arg(long)]
    pub out: PathBuf,
}
